"""Multi-period dispatch LP of a multi-energy system.

Per time step the LP carries one balance row per node, one coupling row per
converter and one energy row per storage; over the horizon it adds the CO2
budget, hydrogen blending limits and storage cyclicity. Sign convention: all
generation ``pg``, demand ``pd`` and link flows ``pt`` are non-negative.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Collection

import numpy as np

from lisa.lp import LpBuilder, LpError, LpSolution, StandardFormLP
from lisa.scenario import HOURS_PER_YEAR, Scenario, as_series, validate_scenario


@dataclass(frozen=True)
class DispatchConfig:
    n_steps: int
    step_hours: float = 1.0
    co2_budget: float | None = None
    h2_blend: float = 1.0
    blend_scope: str = "node"
    blending: bool = True

    def __post_init__(self):
        if self.n_steps < 2:
            raise ValueError("dispatch horizon needs at least 2 steps")
        if self.co2_budget is not None and self.co2_budget < 0:
            raise ValueError("CO2 budget must be >= 0")
        if not 0.0 <= self.h2_blend <= 1.0:
            raise ValueError("h2_blend must lie in [0, 1]")

    @property
    def annual_factor(self) -> float:
        """Multiplier turning horizon totals into yearly totals."""
        return HOURS_PER_YEAR / (self.n_steps * self.step_hours)

    @classmethod
    def from_scenario(cls, s: Scenario) -> "DispatchConfig":
        budget = None
        if s.co2_budget_per_year is not None:
            budget = s.co2_budget_per_year * s.n_steps * s.step_hours / HOURS_PER_YEAR
        return cls(
            n_steps=s.n_steps,
            step_hours=s.step_hours,
            co2_budget=budget,
            h2_blend=s.h2_blend,
            blend_scope=s.blend_scope,
        )


@dataclass(frozen=True)
class Owner:
    kind: str  # source, sink, storage, converter, link
    sector: str
    to_sector: str | None = None
    efficiency: float = 1.0


@dataclass(frozen=True, eq=False)
class VariableMap:
    """Bijection between LP indices and ``(role, owner, step)`` keys.

    Column roles: ``pg``, ``pd``, ``e``, ``pt``. Row families: ``balance``,
    ``couple``, ``storage``, ``cyclic``, ``co2``, ``blend``, ``cap``.
    """

    columns: tuple[tuple, ...]
    rows: tuple[tuple, ...]
    owners: dict[str, Owner]
    n_steps: int
    step_hours: float
    col_index: dict = field(init=False, repr=False)
    row_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "col_index", {k: i for i, k in enumerate(self.columns)})
        object.__setattr__(self, "row_index", {k: i for i, k in enumerate(self.rows)})
        if len(self.col_index) != len(self.columns) or len(self.row_index) != len(self.rows):
            raise ValueError("variable map keys must be unique")

    def col(self, role: str, owner: str, k: int) -> int:
        return self.col_index[(role, owner, k)]

    def series(self, role: str, owner: str) -> np.ndarray:
        return np.array([self.col_index[(role, owner, k)] for k in range(self.n_steps)])

    def has(self, role: str, owner: str) -> bool:
        return (role, owner, 0) in self.col_index

    def row(self, *key) -> int:
        return self.row_index[tuple(key)]

    def family(self, name: str) -> list[int]:
        return [i for i, k in enumerate(self.rows) if k[0] == name]


def _key_name(key: tuple) -> str:
    head, *rest = key
    return f"{head}[{','.join(str(r) for r in rest)}]"


class _Assembler:
    def __init__(self):
        self.b = LpBuilder()
        self.cols: list[tuple] = []
        self.rows: list[tuple] = []

    def col(self, key, cost=0.0, lb=0.0, ub=np.inf) -> int:
        self.cols.append(key)
        return self.b.add_col(_key_name(key), cost, lb, ub)

    def row(self, key, coefs, sense, rhs) -> int:
        self.rows.append(key)
        return self.b.add_row(_key_name(key), coefs, sense, rhs)


def build_dispatch_lp(
    s: Scenario, cfg: DispatchConfig, capacity_targets: Collection[str] = ()
) -> tuple[StandardFormLP, VariableMap]:
    """Assemble the dispatch LP.

    ``capacity_targets`` lists component/link ids whose upper bound is
    emitted as explicit ``cap`` rows instead of column bounds, so investment
    columns can later relax them.
    """
    if cfg.n_steps != s.n_steps:
        raise ValueError(f"config horizon {cfg.n_steps} does not match scenario profiles ({s.n_steps} steps)")
    report = validate_scenario(s)
    if report:
        raise ValueError(f"invalid scenario:\n{report}")
    N, dt = cfg.n_steps, cfg.step_hours
    nodes = {n.id: n for n in s.nodes}
    targets = set(capacity_targets)
    asm = _Assembler()
    owners: dict[str, Owner] = {}
    gen = defaultdict(list)  # node -> [(col, k, owner, h2-origin)]
    dem = defaultdict(list)
    cap_rows: list[tuple[str, int, int, float]] = []

    def bounded(owner, role, k, cost, lo, hi):
        if owner in targets:
            j = asm.col((role, owner, k), cost, lo, np.inf)
            cap_rows.append((owner, k, j, hi))
            return j
        return asm.col((role, owner, k), cost, lo, hi)

    for c in s.components:
        if c.kind == "source":
            owners[c.id] = Owner("source", nodes[c.node].sector)
            lo, hi = as_series(c.lower, N), as_series(c.upper, N)
            for k in range(N):
                j = bounded(c.id, "pg", k, c.cost * dt, lo[k], hi[k])
                gen[c.node].append((j, k, c.id, False))
        elif c.kind == "sink":
            owners[c.id] = Owner("sink", nodes[c.node].sector)
            lo, hi = as_series(c.lower, N), as_series(c.upper, N)
            for k in range(N):
                j = bounded(c.id, "pd", k, c.cost * dt, lo[k], hi[k])
                dem[c.node].append((j, k))
        elif c.kind == "storage":
            owners[c.id] = Owner("storage", nodes[c.node].sector)
            pg_hi, pd_hi = as_series(c.p_g_max, N), as_series(c.p_d_max, N)
            for k in range(N):
                jg = asm.col(("pg", c.id, k), 0.0, 0.0, pg_hi[k])
                jd = asm.col(("pd", c.id, k), 0.0, 0.0, pd_hi[k])
                gen[c.node].append((jg, k, c.id, None))
                dem[c.node].append((jd, k))
            for k in range(N):
                lo = hi = c.e_set if k == 0 else None
                asm.col(("e", c.id, k), 0.0, 0.0 if lo is None else lo, c.e_max if hi is None else hi)
        elif c.kind == "converter":
            src, dst = nodes[c.from_node].sector, nodes[c.to_node].sector
            owners[c.id] = Owner("converter", src, dst, c.efficiency)
            lo, hi = as_series(c.lower, N), as_series(c.upper, N)
            for k in range(N):
                jd = bounded(c.id, "pd", k, c.cost * dt, lo[k], hi[k])
                jg = asm.col(("pg", c.id, k), 0.0, 0.0, np.inf)
                dem[c.from_node].append((jd, k))
                gen[c.to_node].append((jg, k, c.id, src == "hydrogen"))
    flows_out = defaultdict(list)
    flows_in = defaultdict(list)
    for l in s.links:
        owners[l.id] = Owner("link", l.sector)
        for k in range(N):
            j = bounded(l.id, "pt", k, l.cost * dt, 0.0, l.ntc)
            flows_out[l.from_node].append((j, k))
            flows_in[l.to_node].append((j, k))

    # nodal balance: gen - dem - out + in = 0
    for node in s.nodes:
        per_k = defaultdict(list)
        for j, k, *_ in gen[node.id]:
            per_k[k].append((j, 1.0))
        for j, k in dem[node.id]:
            per_k[k].append((j, -1.0))
        for j, k in flows_out[node.id]:
            per_k[k].append((j, -1.0))
        for j, k in flows_in[node.id]:
            per_k[k].append((j, 1.0))
        for k in range(N):
            asm.row(("balance", node.id, k), per_k[k], "E", 0.0)

    col_of = {key: i for i, key in enumerate(asm.cols)}
    for c in s.components:
        if c.kind == "converter":
            for k in range(N):
                coefs = [(col_of[("pg", c.id, k)], 1.0), (col_of[("pd", c.id, k)], -c.efficiency)]
                asm.row(("couple", c.id, k), coefs, "E", 0.0)
        elif c.kind == "storage":
            xi = as_series(c.xi, N)
            for k in range(N):
                nxt = (k + 1) % N
                coefs = [
                    (col_of[("e", c.id, nxt)], 1.0),
                    (col_of[("e", c.id, k)], -1.0),
                    (col_of[("pg", c.id, k)], 1.0 / c.eta_g * dt),
                    (col_of[("pd", c.id, k)], -c.eta_d * dt),
                ]
                asm.row(("storage", c.id, k), coefs, "E", xi[k])
            asm.row(
                ("cyclic", c.id),
                [(col_of[("e", c.id, N - 1)], 1.0), (col_of[("e", c.id, 0)], -1.0)],
                "E",
                0.0,
            )

    if cfg.co2_budget is not None:
        coefs = []
        for c in s.components:
            if c.kind == "source" and c.co2 != 0.0:
                coefs += [(col_of[("pg", c.id, k)], c.co2 * dt) for k in range(N)]
        asm.row(("co2",), coefs, "L", cfg.co2_budget)

    if cfg.blending and cfg.h2_blend < 1.0:
        _blend_rows(asm, s, cfg, nodes, gen)

    for owner, k, j, hi in cap_rows:
        if np.isfinite(hi):
            asm.row(("cap", owner, k), [(j, 1.0)], "L", hi)
    lp = asm.b.build()
    vmap = VariableMap(tuple(asm.cols), tuple(asm.rows), owners, N, dt)
    return lp, vmap


def _blend_rows(asm, s, cfg, nodes, gen):
    """Hydrogen injected into methane <= h2_blend * other methane injection."""
    groups = defaultdict(list)
    for node_id, entries in gen.items():
        if nodes[node_id].sector != "methane":
            continue
        key = node_id if cfg.blend_scope == "node" else "system"
        groups[key].extend(entries)
    for key, entries in groups.items():
        if not any(h2 for *_, h2 in entries):
            continue
        for k in range(cfg.n_steps):
            coefs = []
            for j, kk, _, h2 in entries:
                if kk != k or h2 is None:  # storage discharge is neither
                    continue
                coefs.append((j, 1.0 if h2 else -cfg.h2_blend))
            asm.row(("blend", key, k), coefs, "L", 0.0)


class SolveError(LpError):
    """A dispatch or pathway solve did not reach optimality."""


@dataclass
class DispatchSolution:
    status: str
    objective: float
    n_steps: int
    step_hours: float
    series: dict[str, dict[str, np.ndarray]]
    owners: dict[str, Owner]
    objective_by_sector: dict[str, float]
    co2_emissions: float
    co2_price: float
    nodal_prices: dict[str, np.ndarray] = field(default_factory=dict)

    def get(self, owner: str, role: str) -> np.ndarray:
        return self.series[owner][role]


def extract_dispatch_solution(sol: LpSolution, vmap: VariableMap, lp: StandardFormLP | None = None) -> DispatchSolution:
    """Named series from an optimal LP solution over ``vmap``'s columns.

    ``sol`` may belong to a larger LP whose first columns/rows are those of
    ``vmap`` (as for a pathway block after slicing).
    """
    if not sol.optimal:
        raise SolveError(sol.status, f"dispatch solve ended with status {sol.status}")
    x = sol.x
    series: dict[str, dict[str, np.ndarray]] = defaultdict(dict)
    for (role, owner, _k) in vmap.columns:
        if role not in series[owner]:
            series[owner][role] = x[vmap.series(role, owner)]
    by_sector: dict[str, float] = defaultdict(float)
    if lp is not None:
        for i, (role, owner, _k) in enumerate(vmap.columns):
            if lp.c[i]:
                by_sector[vmap.owners[owner].sector] += lp.c[i] * x[i]
    co2 = 0.0
    price = 0.0
    if ("co2",) in vmap.row_index:
        i = vmap.row("co2")
        if lp is not None:
            co2 = float((lp.A.getrow(i) @ x)[0])
        price = max(0.0, -float(sol.duals[i]))
    prices = {}
    for (fam, node, k), i in ((key, i) for i, key in enumerate(vmap.rows) if key[0] == "balance"):
        prices.setdefault(node, np.zeros(vmap.n_steps))[k] = sol.duals[i] / vmap.step_hours
    return DispatchSolution(
        status=sol.status,
        objective=float(sol.objective),
        n_steps=vmap.n_steps,
        step_hours=vmap.step_hours,
        series=dict(series),
        owners=vmap.owners,
        objective_by_sector=dict(by_sector),
        co2_emissions=co2,
        co2_price=price,
        nodal_prices=prices,
    )


@dataclass(frozen=True)
class FlowRow:
    kind: str  # converter, sector_pair, supply, demand
    name: str
    from_sector: str
    to_sector: str
    energy_in: float
    energy_out: float


def flow_summary(sol: DispatchSolution, annualize: bool = False) -> list[FlowRow]:
    """Energy totals (MWh) per converter, per sector pair, and supply/demand per sector."""
    dt = sol.step_hours
    scale = (HOURS_PER_YEAR / (sol.n_steps * dt)) if annualize else 1.0
    rows: list[FlowRow] = []
    pairs: dict[tuple[str, str], list[float]] = defaultdict(lambda: [0.0, 0.0])
    supply: dict[str, float] = defaultdict(float)
    demand: dict[str, float] = defaultdict(float)
    for owner, info in sol.owners.items():
        ser = sol.series.get(owner, {})
        if info.kind == "converter":
            e_in = float(ser["pd"].sum() * dt * scale)
            e_out = float(ser["pg"].sum() * dt * scale)
            rows.append(FlowRow("converter", owner, info.sector, info.to_sector, e_in, e_out))
            acc = pairs[(info.sector, info.to_sector)]
            acc[0] += e_in
            acc[1] += e_out
        elif info.kind == "source":
            supply[info.sector] += float(ser["pg"].sum() * dt * scale)
        elif info.kind == "sink":
            demand[info.sector] += float(ser["pd"].sum() * dt * scale)
    for (a, b), (e_in, e_out) in sorted(pairs.items()):
        rows.append(FlowRow("sector_pair", f"{a}->{b}", a, b, e_in, e_out))
    for sec, v in sorted(supply.items()):
        rows.append(FlowRow("supply", sec, "primary", sec, v, v))
    for sec, v in sorted(demand.items()):
        rows.append(FlowRow("demand", sec, sec, "final", v, v))
    return rows
