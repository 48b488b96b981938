"""In-memory description of a multi-energy system and its investment pathway.

Units: power MW, energy MWh, fuel and variable costs EUR/MWh, CAPEX EUR/kW,
CO2 factors t/MWh, budgets t. Time series are numpy arrays of length
``Scenario.n_steps``; a plain float stands for a constant series.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

SECTORS = ("electricity", "methane", "hydrogen", "heat", "external")
KINDS = ("source", "sink", "storage", "converter")
HOURS_PER_YEAR = 8760.0

Profile = Union[float, np.ndarray]


def as_series(value: Profile, n: int) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n, float(arr))
    if arr.shape != (n,):
        raise ValueError(f"profile has length {arr.shape[0]}, expected {n}")
    return arr


def _slice(value: Profile, n: int) -> Profile:
    if isinstance(value, np.ndarray) and value.ndim == 1:
        return value[:n].copy()
    return value


@dataclass(frozen=True)
class Node:
    id: str
    sector: str
    region: str = ""


@dataclass(frozen=True)
class Link:
    id: str
    sector: str
    from_node: str
    to_node: str
    ntc: float
    length_km: float = 0.0
    cost: float = 0.0
    provenance: str = ""


@dataclass(frozen=True, eq=False)
class Component:
    """Source, sink, storage or converter.

    Sources and sinks bound their single variable by ``lower``/``upper``.
    Storage uses ``p_g_max``/``p_d_max`` for discharge/charge ratings and
    ``e_max``, ``eta_g``, ``eta_d``, ``xi``, ``e_set`` for the energy balance.
    A converter draws from ``from_node`` (input capped by ``upper``) and
    feeds ``efficiency`` times that into ``to_node``.
    """

    id: str
    kind: str
    node: str | None = None
    lower: Profile = 0.0
    upper: Profile = np.inf
    cost: float = 0.0
    co2: float = 0.0
    e_max: float = 0.0
    eta_g: float = 1.0
    eta_d: float = 1.0
    p_g_max: Profile = np.inf
    p_d_max: Profile = np.inf
    xi: Profile = 0.0
    e_set: float = 0.0
    from_node: str | None = None
    to_node: str | None = None
    efficiency: float = 1.0
    technology: str = ""
    provenance: str = ""

    def nodes(self) -> tuple[str, ...]:
        if self.kind == "converter":
            return (self.from_node, self.to_node)
        return (self.node,)


@dataclass(frozen=True, eq=False)
class InvestmentOption:
    """Capacity expansion of one or more targets (component or link ids).

    ``effect`` is the capacity gained per MW invested, a constant or a
    profile (e.g. PV availability). ``capex`` maps horizon year to EUR/kW.
    """

    id: str
    technology: str
    targets: tuple[str, ...]
    capex: dict[int, float]
    lifetime: float
    effect: Profile = 1.0
    z_max: float = np.inf
    region: str = ""
    provenance: str = ""


@dataclass(frozen=True)
class LearningParams:
    c0: float
    p0: float
    r: float


@dataclass(frozen=True, eq=False)
class PathwayData:
    base_year: int
    years: tuple[int, ...]
    terminal_year: int
    wacc: float
    co2_budget: dict[int, float]
    external_price: dict[int, float] = field(default_factory=dict)
    external_co2: dict[int, float] = field(default_factory=dict)
    import_components: tuple[str, ...] = ()
    export_components: tuple[str, ...] = ()
    overrides: dict[int, dict[str, dict[str, float]]] = field(default_factory=dict)
    caps: dict[str, dict[int, float]] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    n_steps: int
    step_hours: float
    nodes: tuple[Node, ...]
    components: tuple[Component, ...]
    links: tuple[Link, ...] = ()
    options: tuple[InvestmentOption, ...] = ()
    learning: dict[str, LearningParams] = field(default_factory=dict)
    pathway: PathwayData | None = None
    co2_budget_per_year: float | None = None
    h2_blend: float = 1.0
    blend_scope: str = "node"
    solver: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def node(self, node_id: str) -> Node:
        return self._nodes()[node_id]

    def _nodes(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    def component(self, comp_id: str) -> Component:
        for c in self.components:
            if c.id == comp_id:
                return c
        raise KeyError(comp_id)

    def link(self, link_id: str) -> Link:
        for l in self.links:
            if l.id == link_id:
                return l
        raise KeyError(link_id)

    def option(self, option_id: str) -> InvestmentOption:
        for o in self.options:
            if o.id == option_id:
                return o
        raise KeyError(option_id)

    def truncated(self, n: int) -> "Scenario":
        """Same system restricted to the first ``n`` time steps."""
        if n > self.n_steps:
            raise ValueError(f"cannot extend {self.n_steps} steps to {n}")
        comps = tuple(
            replace(
                c,
                lower=_slice(c.lower, n),
                upper=_slice(c.upper, n),
                p_g_max=_slice(c.p_g_max, n),
                p_d_max=_slice(c.p_d_max, n),
                xi=_slice(c.xi, n),
            )
            for c in self.components
        )
        opts = tuple(replace(o, effect=_slice(o.effect, n)) for o in self.options)
        return replace(self, n_steps=n, components=comps, options=opts)

    def for_year(self, year: int) -> "Scenario":
        """Scenario with the pathway's per-year prices, factors and overrides applied."""
        pw = self.pathway
        if pw is None:
            return self
        if year not in pw.years:
            raise KeyError(f"{year} is not a pathway year")
        changes: dict[str, dict[str, float]] = {}
        for cid in pw.import_components:
            if year not in pw.external_price or year not in pw.external_co2:
                raise KeyError(f"missing external price/CO2 factor for {year}")
            changes.setdefault(cid, {}).update(cost=pw.external_price[year], co2=pw.external_co2[year])
        for cid in pw.export_components:
            if year not in pw.external_price:
                raise KeyError(f"missing external price for {year}")
            changes.setdefault(cid, {}).update(cost=-pw.external_price[year])
        for cid, fields in pw.overrides.get(year, {}).items():
            changes.setdefault(cid, {}).update(fields)
        known = {c.id for c in self.components}
        unknown = set(changes) - known
        if unknown:
            raise KeyError(f"overrides for unknown components: {sorted(unknown)}")
        comps = tuple(replace(c, **changes[c.id]) if c.id in changes else c for c in self.components)
        budget = pw.co2_budget.get(year)
        if budget is None:
            raise KeyError(f"missing CO2 budget for {year}")
        return replace(self, components=comps, co2_budget_per_year=budget)


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


class ValidationReport(list):
    """List of ``Violation``; empty iff the scenario is well-formed."""

    @property
    def ok(self) -> bool:
        return not self

    def __str__(self):
        return "\n".join(str(v) for v in self) or "ok"


def _check_profile(report, path, value, n):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1 and arr.shape[0] != n:
        report.append(Violation(path, f"profile length {arr.shape[0]} != {n}"))
        return None
    if np.any(np.isnan(arr)):
        report.append(Violation(path, "profile contains NaN"))
        return None
    return arr


def validate_scenario(s: Scenario) -> ValidationReport:
    report = ValidationReport()
    n = s.n_steps
    if n < 2:
        report.append(Violation("n_steps", "at least 2 steps are required"))
    if s.step_hours <= 0:
        report.append(Violation("step_hours", "must be positive"))
    if not 0.0 <= s.h2_blend <= 1.0:
        report.append(Violation("h2_blend", "must lie in [0, 1]"))
    if s.blend_scope not in ("node", "system"):
        report.append(Violation("blend_scope", "must be 'node' or 'system'"))
    if s.co2_budget_per_year is not None and s.co2_budget_per_year < 0:
        report.append(Violation("co2_budget_per_year", "must be >= 0"))
    nodes: dict[str, Node] = {}
    for i, node in enumerate(s.nodes):
        if node.sector not in SECTORS:
            report.append(Violation(f"nodes/{i}/sector", f"unknown sector {node.sector!r}"))
        if node.id in nodes:
            report.append(Violation(f"nodes/{i}/id", f"duplicate node {node.id!r}"))
        nodes[node.id] = node
    ids: set[str] = set()
    for i, c in enumerate(s.components):
        p = f"components/{c.id}"
        if c.id in ids:
            report.append(Violation(p, "duplicate component id"))
        ids.add(c.id)
        if c.kind not in KINDS:
            report.append(Violation(f"{p}/kind", f"unknown kind {c.kind!r}"))
            continue
        for ref in c.nodes():
            if ref not in nodes:
                report.append(Violation(p, f"dangling node reference {ref!r}"))
        if c.kind == "converter":
            if not 0.0 < c.efficiency <= 1.0:
                report.append(Violation(f"{p}/efficiency", f"efficiency {c.efficiency} outside (0, 1]"))
            if c.from_node in nodes and c.to_node in nodes and nodes[c.from_node].sector == nodes[c.to_node].sector:
                report.append(Violation(p, "converter must change sector"))
        if c.kind == "storage":
            for name in ("eta_g", "eta_d"):
                eta = getattr(c, name)
                if not 0.0 < eta <= 1.0:
                    report.append(Violation(f"{p}/{name}", f"efficiency {eta} outside (0, 1]"))
            if c.e_max < 0 or not 0.0 <= c.e_set <= c.e_max:
                report.append(Violation(f"{p}/e_set", "initial level must lie in [0, e_max]"))
        profiles = {}
        for name in ("lower", "upper", "p_g_max", "p_d_max", "xi"):
            profiles[name] = _check_profile(report, f"{p}/{name}", getattr(c, name), n)
        lo, hi = profiles["lower"], profiles["upper"]
        if lo is not None and hi is not None and np.any(lo > hi):
            report.append(Violation(p, "lower profile exceeds upper profile"))
    link_ids: set[str] = set()
    for l in s.links:
        p = f"links/{l.id}"
        if l.id in link_ids:
            report.append(Violation(p, "duplicate link id"))
        link_ids.add(l.id)
        for end in (l.from_node, l.to_node):
            if end not in nodes:
                report.append(Violation(p, f"dangling node reference {end!r}"))
            elif nodes[end].sector != l.sector:
                report.append(Violation(p, f"endpoint {end!r} not in sector {l.sector!r}"))
        if l.from_node == l.to_node:
            report.append(Violation(p, "self-loop"))
        if l.ntc < 0:
            report.append(Violation(f"{p}/ntc", "must be >= 0"))
    targets = ids | link_ids
    years = s.pathway.years if s.pathway else ()
    for o in s.options:
        p = f"options/{o.id}"
        for t in o.targets:
            if t not in targets:
                report.append(Violation(p, f"target {t!r} does not exist"))
            elif t in ids and s.component(t).kind == "storage":
                report.append(Violation(p, f"storage target {t!r} is not supported"))
        if o.z_max < 0:
            report.append(Violation(f"{p}/z_max", "must be >= 0"))
        if o.lifetime <= 0:
            report.append(Violation(f"{p}/lifetime", "must be > 0"))
        _check_profile(report, f"{p}/effect", o.effect, n)
        for y in years:
            if y not in o.capex:
                report.append(Violation(f"{p}/capex", f"missing CAPEX for {y}"))
    for tech, lp in s.learning.items():
        p = f"learning/{tech}"
        if not 0.0 < lp.r < 1.0:
            report.append(Violation(f"{p}/r", "learning index must lie in (0, 1)"))
        if lp.c0 <= 0:
            report.append(Violation(f"{p}/c0", "must be > 0"))
        if lp.p0 < 0:
            report.append(Violation(f"{p}/p0", "must be >= 0"))
    pw = s.pathway
    if pw is not None:
        seq = (pw.base_year,) + tuple(pw.years) + (pw.terminal_year,)
        if not pw.years or pw.years[0] < pw.base_year or any(b <= a for a, b in zip(seq[1:], seq[2:])):
            report.append(Violation("pathway/years", "years must be strictly increasing, starting at or after base_year"))
        if pw.wacc <= -1:
            report.append(Violation("pathway/wacc", "must be > -1"))
        for y in pw.years:
            if y not in pw.co2_budget:
                report.append(Violation("pathway/co2_budget", f"missing budget for {y}"))
            if pw.import_components or pw.export_components:
                if y not in pw.external_price:
                    report.append(Violation("pathway/external_price", f"missing price for {y}"))
            if pw.import_components and y not in pw.external_co2:
                report.append(Violation("pathway/external_co2", f"missing factor for {y}"))
        for cid in pw.import_components + pw.export_components + tuple(
            c for ov in pw.overrides.values() for c in ov
        ):
            if cid not in ids:
                report.append(Violation("pathway", f"unknown component {cid!r}"))
    return report
