"""Investment extension of the dispatch LP and the multi-horizon pathway problem.

Investment columns ``z`` relax capacity rows ``p(k) <= cap(k)`` of their
targets by ``effect(k) * z``. In a pathway, a column decided in horizon m
keeps relaxing the rows of every later horizon.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from lisa.lp import LE, LpSolution, StandardFormLP
from lisa.milp import MilpProblem
from lisa.model import DispatchConfig, VariableMap, build_dispatch_lp
from lisa.scenario import HOURS_PER_YEAR, InvestmentOption, Scenario, as_series

log = logging.getLogger(__name__)

MW_PER_KW = 1000.0  # EUR/kW -> EUR/MW


@dataclass(frozen=True, eq=False)
class PathwaySpec:
    base_year: int
    years: tuple[int, ...]
    terminal_year: int
    wacc: float
    configs: tuple[DispatchConfig, ...] = ()
    caps: dict[str, dict[int, float]] = field(default_factory=dict)

    def __post_init__(self):
        seq = (self.base_year,) + tuple(self.years) + (self.terminal_year,)
        if not self.years:
            raise ValueError("pathway needs at least one horizon")
        if self.years[0] < self.base_year or any(b <= a for a, b in zip(seq[1:], seq[2:])):
            raise ValueError("pathway years must be strictly increasing")
        if self.wacc <= -1:
            raise ValueError("WACC must be > -1")
        if self.configs and len(self.configs) != len(self.years):
            raise ValueError("one dispatch config per horizon required")

    @property
    def M(self) -> int:
        return len(self.years)

    def year(self, m: int) -> int:
        """Year of horizon ``m`` (0-based); ``m == M`` gives the terminal year."""
        return self.years[m] if m < self.M else self.terminal_year

    @classmethod
    def from_scenario(cls, s: Scenario) -> "PathwaySpec":
        pw = s.pathway
        if pw is None:
            raise ValueError("scenario has no pathway section")
        configs = []
        for y in pw.years:
            if y not in pw.co2_budget:
                raise ValueError(f"missing CO2 budget for {y}")
            configs.append(
                DispatchConfig(
                    n_steps=s.n_steps,
                    step_hours=s.step_hours,
                    co2_budget=pw.co2_budget[y] * s.n_steps * s.step_hours / HOURS_PER_YEAR,
                    h2_blend=s.h2_blend,
                    blend_scope=s.blend_scope,
                )
            )
        return cls(pw.base_year, tuple(pw.years), pw.terminal_year, pw.wacc, tuple(configs), dict(pw.caps))


def discount_sum(start: int, stop: int, base: int, wacc: float) -> float:
    """Sum of ``(1/(1+w))**(t-base+1)`` for ``t`` in ``[start, stop)``, term by term.

    Costs of year ``t`` are discounted at the end of that year, which is the
    convention of the closed form used by ``disp_weight``.
    """
    q = 1.0 / (1.0 + wacc)
    return float(sum(q ** (t - base + 1) for t in range(start, stop)))


def disp_weight(m: int, spec: PathwaySpec) -> float:
    """Discounted number of years represented by horizon ``m`` (0-based)."""
    t_m, t_next, w = spec.year(m), spec.year(m + 1), spec.wacc
    if abs(w) < 1e-9:
        return discount_sum(t_m, t_next, spec.base_year, w)
    q = 1.0 / (1.0 + w)
    return q ** (t_m - spec.base_year) * (1.0 - q ** (t_next - t_m)) / w


def inv_weight(m: int, option: InvestmentOption | float, spec: PathwaySpec) -> float:
    """Share of CAPEX charged for an investment made in horizon ``m``.

    Discounted to the base year and scaled by the remaining pathway length
    over the lifetime; may exceed 1. ``m == M`` yields 0.
    """
    lifetime = option if isinstance(option, (int, float)) else option.lifetime
    t_m = spec.year(m)
    return (1.0 + spec.wacc) ** (-(t_m - spec.base_year)) * (spec.terminal_year - t_m) / lifetime


def option_capex(option: InvestmentOption, year: int) -> float:
    try:
        return float(option.capex[year])
    except KeyError:
        raise ValueError(f"option {option.id!r} has no CAPEX for {year}") from None


def capacity_relief(lp_rows: int, vmap: VariableMap, option: InvestmentOption) -> tuple[list[int], list[float]]:
    """Rows and coefficients of the ``G`` column of ``option`` (negative effect)."""
    effect = as_series(option.effect, vmap.n_steps)
    rows, vals = [], []
    for t in option.targets:
        for k in range(vmap.n_steps):
            i = vmap.row_index.get(("cap", t, k))
            if i is not None and effect[k] != 0.0:
                rows.append(i)
                vals.append(-effect[k])
    return rows, vals


def targets_of(options) -> set[str]:
    return {t for o in options for t in o.targets}


def build_eacp(
    s: Scenario,
    cfg: DispatchConfig,
    options: list[InvestmentOption] | None = None,
    annual_cost: dict[str, float] | None = None,
    year: int | None = None,
) -> tuple[StandardFormLP, VariableMap]:
    """Single-horizon dispatch LP plus investment columns.

    Investment cost per column is the annual cost (EUR/kW/a; default CAPEX
    over lifetime) scaled to the simulated horizon length, so the objective
    stays in horizon units.
    """
    options = list(s.options if options is None else options)
    known = {c.id for c in s.components} | {l.id for l in s.links}
    for o in options:
        missing = [t for t in o.targets if t not in known]
        if missing:
            raise ValueError(f"option {o.id!r} targets unknown ids {missing}")
    lp, vmap = build_dispatch_lp(s, cfg, targets_of(options))
    share = 1.0 / cfg.annual_factor
    costs, ubs, names, G_rows, G_cols, G_vals = [], [], [], [], [], []
    for j, o in enumerate(options):
        if annual_cost is not None and o.id in annual_cost:
            per_kw = annual_cost[o.id]
        else:
            if year is None:
                year = min(o.capex) if o.capex else None
            per_kw = option_capex(o, year) / o.lifetime if o.capex else 0.0
        costs.append(per_kw * MW_PER_KW * share)
        ubs.append(o.z_max)
        names.append(f"z[{o.id}]")
        rows, vals = capacity_relief(lp.n_rows, vmap, o)
        G_rows += rows
        G_cols += [j] * len(rows)
        G_vals += vals
    G = sp.csc_matrix((G_vals, (G_rows, G_cols)), shape=(lp.n_rows, len(options)))
    full = StandardFormLP(
        c=np.concatenate([lp.c, costs]),
        A=sp.hstack([lp.A, G], format="csc"),
        b=lp.b,
        senses=lp.senses,
        lb=np.concatenate([lp.lb, np.zeros(len(options))]),
        ub=np.concatenate([lp.ub, ubs]),
        col_names=lp.col_names + tuple(names),
        row_names=lp.row_names,
        offset=lp.offset,
    )
    columns = vmap.columns + tuple(("z", o.id, 0) for o in options)
    return full, VariableMap(columns, vmap.rows, vmap.owners, vmap.n_steps, vmap.step_hours)


@dataclass(frozen=True, eq=False)
class HorizonBlock:
    """Dispatch block of one horizon: ``A_m X_m + G_m z <= b_m``.

    The block's objective contribution is ``weight * (c_m X_m + offset)``.
    """

    year: int
    lp: StandardFormLP
    G: sp.csr_matrix
    weight: float
    vmap: VariableMap | None = None
    config: DispatchConfig | None = None


@dataclass(frozen=True)
class InvestmentColumn:
    option: str
    technology: str
    horizon: int
    year: int
    ub: float
    cost: float
    inv_weight: float = 1.0
    learning: bool = False
    lifetime: float | None = None


@dataclass(frozen=True)
class LearningInfo:
    technology: str
    y: np.ndarray  # GW
    values: np.ndarray  # bn EUR
    weights: tuple[float, ...]  # inv weight per horizon, length M
    gamma: tuple[tuple[int, ...], ...]  # ext-local gamma columns per horizon
    delta: tuple[tuple[int, ...], ...]
    z_cols: tuple[tuple[int, ...], ...]  # z columns per horizon
    curve: object = None  # the LearningCurve behind the breakpoints


@dataclass(frozen=True, eq=False)
class ExtraBlock:
    """Investment-side columns beyond ``z`` (learning curve encodings)."""

    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    names: tuple[str, ...]
    A: sp.csr_matrix  # rows x (n_z + n_ext)
    b: np.ndarray
    senses: np.ndarray
    row_names: tuple[str, ...]
    binaries: tuple[int, ...] = ()
    sos2: tuple[tuple[int, ...], ...] = ()
    learning: tuple[LearningInfo, ...] = ()

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass(frozen=True, eq=False)
class PathwayProblem:
    years: tuple[int, ...]
    blocks: tuple[HorizonBlock, ...]
    z: tuple[InvestmentColumn, ...]
    F: sp.csr_matrix
    bF: np.ndarray
    ext: ExtraBlock | None = None
    spec: PathwaySpec | None = None

    @property
    def M(self) -> int:
        return len(self.blocks)

    @property
    def n_z(self) -> int:
        return len(self.z)

    @property
    def n_ext(self) -> int:
        return 0 if self.ext is None else self.ext.n

    @property
    def z_cost(self) -> np.ndarray:
        return np.array([c.cost for c in self.z], dtype=float)

    @property
    def z_ub(self) -> np.ndarray:
        return np.array([c.ub for c in self.z], dtype=float)

    @property
    def is_mip(self) -> bool:
        return self.ext is not None and bool(self.ext.binaries or self.ext.sos2)

    def investment_rows(self) -> tuple[sp.csr_matrix, np.ndarray, np.ndarray, tuple[str, ...]]:
        """Rows over ``[z, ext]`` shared by the closed problem and the Benders master."""
        n = self.n_z + self.n_ext
        parts = [sp.hstack([self.F, sp.csr_matrix((self.F.shape[0], self.n_ext))], format="csr")]
        b = [self.bF]
        senses = [np.full(len(self.bF), LE)]
        names = tuple(f"F{i}" for i in range(len(self.bF)))
        if self.ext is not None:
            parts.append(sp.csr_matrix(self.ext.A, shape=(len(self.ext.b), n)))
            b.append(self.ext.b)
            senses.append(self.ext.senses)
            names += self.ext.row_names
        return sp.vstack(parts, format="csr"), np.concatenate(b), np.concatenate(senses), names

    def investment_columns(self):
        c = self.z_cost
        lb = np.zeros(self.n_z)
        ub = self.z_ub
        names = tuple(f"z[{z.option},{z.year}]" for z in self.z)
        if self.ext is not None:
            c = np.concatenate([c, self.ext.c])
            lb = np.concatenate([lb, self.ext.lb])
            ub = np.concatenate([ub, self.ext.ub])
            names += self.ext.names
        return c, lb, ub, names

    def block_offsets(self) -> list[int]:
        out, pos = [], 0
        for blk in self.blocks:
            out.append(pos)
            pos += blk.lp.n_cols
        return out + [pos]

    def closed_problem(self) -> MilpProblem:
        """Monolithic problem over ``[X_1 .. X_M, z, ext]``."""
        offs = self.block_offsets()
        n_x = offs[-1]
        rows = []
        b, senses, row_names = [], [], []
        c_parts, lb_parts, ub_parts, names = [], [], [], []
        offset = 0.0
        for m, blk in enumerate(self.blocks):
            left = sp.csr_matrix((blk.lp.n_rows, offs[m]))
            right = sp.csr_matrix((blk.lp.n_rows, n_x - offs[m + 1]))
            G = sp.hstack([blk.G, sp.csr_matrix((blk.lp.n_rows, self.n_ext))], format="csr")
            rows.append(sp.hstack([left, blk.lp.A, right, G], format="csr"))
            b.append(blk.lp.b)
            senses.append(blk.lp.senses)
            row_names += [f"h{blk.year}.{r}" for r in (blk.lp.row_names or range(blk.lp.n_rows))]
            c_parts.append(blk.weight * blk.lp.c)
            lb_parts.append(blk.lp.lb)
            ub_parts.append(blk.lp.ub)
            names += [f"h{blk.year}.{n}" for n in (blk.lp.col_names or range(blk.lp.n_cols))]
            offset += blk.weight * blk.lp.offset
        A_inv, b_inv, s_inv, n_inv_rows = self.investment_rows()
        rows.append(sp.hstack([sp.csr_matrix((A_inv.shape[0], n_x)), A_inv], format="csr"))
        b.append(b_inv)
        senses.append(s_inv)
        row_names += list(n_inv_rows)
        c_inv, lb_inv, ub_inv, inv_names = self.investment_columns()
        lp = StandardFormLP(
            c=np.concatenate(c_parts + [c_inv]),
            A=sp.vstack(rows, format="csc"),
            b=np.concatenate(b),
            senses=np.concatenate(senses),
            lb=np.concatenate(lb_parts + [lb_inv]),
            ub=np.concatenate(ub_parts + [ub_inv]),
            col_names=tuple(names) + inv_names,
            row_names=tuple(row_names),
            offset=offset,
        )
        base = n_x + self.n_z
        binaries, sos2 = (), ()
        if self.ext is not None:
            binaries = tuple(base + j for j in self.ext.binaries)
            sos2 = tuple(tuple(base + j for j in g) for g in self.ext.sos2)
        return MilpProblem(lp, binaries, sos2)

    def block_solution(self, m: int, x: np.ndarray, duals: np.ndarray | None = None) -> LpSolution:
        """Slice of a closed-problem solution belonging to horizon ``m``."""
        offs = self.block_offsets()
        blk = self.blocks[m]
        xs = x[offs[m] : offs[m + 1]]
        if duals is None:
            ds = np.zeros(blk.lp.n_rows)
        else:
            r0 = sum(b.lp.n_rows for b in self.blocks[:m])
            # closed duals are w.r.t. the weighted objective
            ds = duals[r0 : r0 + blk.lp.n_rows] / blk.weight
        obj = float(blk.lp.c @ xs + blk.lp.offset)
        return LpSolution("optimal", xs, obj, ds, np.zeros(len(xs)))


def build_pathway_problem(
    spec: PathwaySpec, s: Scenario, options: list[InvestmentOption] | None = None
) -> PathwayProblem:
    """Block problem with one dispatch block per horizon, forward-coupled investments,
    linear investment costs and optional cumulative capacity rows."""
    options = list(s.options if options is None else options)
    if not spec.configs:
        raise ValueError("pathway spec needs per-horizon dispatch configs")
    targets = targets_of(options)
    z_cols: list[InvestmentColumn] = []
    for m, year in enumerate(spec.years):
        for o in options:
            w = inv_weight(m, o, spec)
            z_cols.append(
                InvestmentColumn(
                    option=o.id,
                    technology=o.technology,
                    horizon=m,
                    year=year,
                    ub=o.z_max,
                    cost=w * option_capex(o, year) * MW_PER_KW,
                    inv_weight=w,
                    lifetime=o.lifetime,
                )
            )
    blocks = []
    for m, year in enumerate(spec.years):
        try:
            sc = s.for_year(year)
        except KeyError as exc:
            raise ValueError(f"inconsistent scenario data for {year}: {exc}") from None
        cfg = spec.configs[m]
        lp, vmap = build_dispatch_lp(sc, cfg, targets)
        rows, cols, vals = [], [], []
        relief = {o.id: capacity_relief(lp.n_rows, vmap, o) for o in options}
        for j, zc in enumerate(z_cols):
            if zc.horizon > m:
                continue
            r, v = relief[zc.option]
            rows += r
            cols += [j] * len(r)
            vals += v
        G = sp.csr_matrix((vals, (rows, cols)), shape=(lp.n_rows, len(z_cols)))
        weight = disp_weight(m, spec) * cfg.annual_factor
        blocks.append(HorizonBlock(year, lp, G, weight, vmap, cfg))
    F_rows, F_b = [], []
    for key, by_year in spec.caps.items():
        members = [j for j, zc in enumerate(z_cols) if key in (zc.option, zc.technology)]
        if not members:
            raise ValueError(f"pathway cap {key!r} matches no investment option")
        for m, year in enumerate(spec.years):
            if year in by_year:
                row = np.zeros(len(z_cols))
                row[[j for j in members if z_cols[j].horizon <= m]] = 1.0
                F_rows.append(row)
                F_b.append(by_year[year])
    F = sp.csr_matrix(np.array(F_rows).reshape(len(F_rows), len(z_cols)))
    return PathwayProblem(tuple(spec.years), tuple(blocks), tuple(z_cols), F, np.array(F_b, dtype=float), None, spec)


def linear_pathway(
    blocks: list[tuple[StandardFormLP, np.ndarray, float]],
    z_cost: list[float],
    z_ub: list[float],
    horizon: list[int] | None = None,
    F=None,
    bF=None,
) -> PathwayProblem:
    """Pathway problem from plain matrices; used for toy and randomized instances.

    Each block is ``(lp, G, weight)`` with ``G`` of shape ``(lp.n_rows, n_z)``.
    """
    n_z = len(z_cost)
    horizon = horizon or [0] * n_z
    zc = tuple(
        InvestmentColumn(f"z{j}", f"z{j}", horizon[j], horizon[j], float(z_ub[j]), float(z_cost[j]))
        for j in range(n_z)
    )
    blks = tuple(
        HorizonBlock(m, lp, sp.csr_matrix(np.asarray(G, dtype=float).reshape(lp.n_rows, n_z)), float(w))
        for m, (lp, G, w) in enumerate(blocks)
    )
    F = sp.csr_matrix((0, n_z)) if F is None else sp.csr_matrix(F)
    bF = np.zeros(0) if bF is None else np.asarray(bF, dtype=float)
    return PathwayProblem(tuple(range(len(blocks))), blks, zc, F, bF)
