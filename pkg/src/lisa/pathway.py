"""Solving pathway problems: closed optimization, horizon subproblems and the
solution summary shared with the decomposition solver."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from lisa.learning import LearningCurve, encode_pw_blocks, learning_costs, learning_investment_cost
from lisa.lp import EQ, INFEASIBLE, LpSession, LpSolution, SolverOptions, StandardFormLP, solve_lp
from lisa.milp import MilpOptions, solve_milp
from lisa.model import DispatchConfig, DispatchSolution, SolveError, VariableMap, build_dispatch_lp, extract_dispatch_solution
from lisa.investment import PathwayProblem, PathwaySpec, build_eacp, build_pathway_problem
from lisa.scenario import Scenario

log = logging.getLogger(__name__)


def build_subproblem(m: int, pathway: PathwayProblem) -> tuple[StandardFormLP, np.ndarray]:
    """Horizon-``m`` block over ``[X_m, z_rel]`` with weighted dispatch costs.

    ``z_rel`` are the investment columns with a nonzero entry in ``G_m``;
    their indices into ``pathway.z`` are returned alongside. They carry no
    cost and are pinned at solve time.
    """
    if not 0 <= m < pathway.M:
        raise IndexError(f"horizon index {m} out of range")
    blk = pathway.blocks[m]
    G = sp.csc_matrix(blk.G)
    rel = np.flatnonzero(np.diff(G.indptr) > 0)
    zc = [pathway.z[j] for j in rel]
    lp = StandardFormLP(
        c=np.concatenate([blk.weight * blk.lp.c, np.zeros(len(rel))]),
        A=sp.hstack([blk.lp.A, G[:, rel]], format="csc"),
        b=blk.lp.b,
        senses=blk.lp.senses,
        lb=np.concatenate([blk.lp.lb, np.zeros(len(rel))]),
        ub=np.concatenate([blk.lp.ub, [c.ub for c in zc]]),
        col_names=(blk.lp.col_names or tuple(f"x{i}" for i in range(blk.lp.n_cols)))
        + tuple(f"z[{c.option},{c.year}]" for c in zc),
        row_names=blk.lp.row_names,
        offset=blk.weight * blk.lp.offset,
    )
    return lp, rel


class Subproblem:
    """Warm-started horizon subproblem with pin rows ``z_rel = z*``."""

    def __init__(self, m: int, pathway: PathwayProblem, opts: SolverOptions | None = None):
        self.m = m
        self.pathway = pathway
        self.lp, self.rel = build_subproblem(m, pathway)
        self.n_x = pathway.blocks[m].lp.n_cols
        self.session = LpSession(self.lp, opts)
        self.pins = [self.session.add_row({self.n_x + i: 1.0}, EQ, 0.0) for i in range(len(self.rel))]

    def solve(self, z: np.ndarray) -> tuple[LpSolution, np.ndarray]:
        """Solve at ``z`` (full investment vector); returns the solution and
        ``d obj / d z`` for every investment column (zeros where unused)."""
        zr = np.asarray(z, dtype=float)[self.rel]
        if self.pins:
            self.session.set_rhs(self.pins, zr, [EQ] * len(self.pins))
        sol = self.session.solve()
        grad = np.zeros(self.pathway.n_z)
        if sol.optimal:
            grad[self.rel] = sol.duals[self.pins]
        return sol, grad

    def block_solution(self, sol: LpSolution) -> LpSolution:
        """Unweighted view of the dispatch part, shaped like the block LP."""
        blk = self.pathway.blocks[self.m]
        nr = blk.lp.n_rows
        x = sol.x[: self.n_x]
        return LpSolution(
            sol.status,
            x,
            float(blk.lp.c @ x + blk.lp.offset),
            sol.duals[:nr] / blk.weight,
            sol.reduced_costs[: self.n_x] / blk.weight,
            iterations=sol.iterations,
        )


@dataclass
class PathwaySolution:
    method: str
    costs: str
    status: str
    objective: float  # EUR
    bound: float
    iterations: int
    years: tuple[int, ...]
    z: dict[str, np.ndarray]  # option -> MW added per horizon
    technology: dict[str, np.ndarray]  # technology -> MW added per horizon
    operating_cost: np.ndarray  # EUR per horizon, discounted
    investment_cost: np.ndarray  # EUR per horizon, discounted
    dispatch: list[DispatchSolution | None] = field(default_factory=list)
    learning: dict[str, np.ndarray] = field(default_factory=dict)  # c_pw(P_m), bn EUR
    seconds: float = 0.0
    log: object | None = None
    mode: str = "pathway"
    curves: dict[str, dict] = field(default_factory=dict)  # learning curve data for reports

    @property
    def gap(self) -> float:
        return abs(self.objective - self.bound) / max(1.0, abs(self.objective))

    @property
    def total_cost(self) -> np.ndarray:
        return self.operating_cost + self.investment_cost


def investment_cost_by_horizon(problem: PathwayProblem, inv_x: np.ndarray) -> np.ndarray:
    out = np.zeros(problem.M)
    z = inv_x[: problem.n_z]
    for j, zc in enumerate(problem.z):
        out[zc.horizon] += zc.cost * z[j]
    return out + learning_investment_cost(problem, inv_x)


def summarize(
    problem: PathwayProblem,
    method: str,
    status: str,
    objective: float,
    bound: float,
    inv_x: np.ndarray,
    block_sols: list[LpSolution],
    iterations: int = 0,
    seconds: float = 0.0,
    log_obj=None,
) -> PathwaySolution:
    z = inv_x[: problem.n_z]
    by_opt: dict[str, np.ndarray] = {}
    by_tech: dict[str, np.ndarray] = {}
    for j, zc in enumerate(problem.z):
        by_opt.setdefault(zc.option, np.zeros(problem.M))[zc.horizon] += z[j]
        by_tech.setdefault(zc.technology, np.zeros(problem.M))[zc.horizon] += z[j]
    operating = np.array([blk.weight * s.objective for blk, s in zip(problem.blocks, block_sols)])
    dispatch = []
    for blk, s in zip(problem.blocks, block_sols):
        dispatch.append(extract_dispatch_solution(s, blk.vmap, blk.lp) if blk.vmap is not None else None)
    return PathwaySolution(
        method=method,
        costs="learning" if problem.ext is not None and problem.ext.learning else "linear",
        status=status,
        objective=float(objective),
        bound=float(bound),
        iterations=iterations,
        years=problem.years,
        z=by_opt,
        technology=by_tech,
        operating_cost=operating,
        investment_cost=investment_cost_by_horizon(problem, inv_x),
        dispatch=dispatch,
        learning=learning_costs(problem, inv_x),
        seconds=seconds,
        log=log_obj,
        curves=curve_data(problem),
    )


def curve_data(problem: PathwayProblem) -> dict[str, dict]:
    out = {}
    for info in problem.ext.learning if problem.ext else ():
        c = info.curve
        out[info.technology] = {
            "c0": c.c0 if c else None,
            "p0": c.p0 if c else None,
            "r": c.r if c else None,
            "y": np.asarray(info.y, dtype=float),
            "values": np.asarray(info.values, dtype=float),
        }
    return out


def dispatch_at(problem: PathwayProblem, z: np.ndarray, opts: SolverOptions | None = None) -> list[LpSolution]:
    """Unweighted block solutions with investments fixed at ``z``."""
    out = []
    for m in range(problem.M):
        sub = Subproblem(m, problem, opts)
        sol, _ = sub.solve(z)
        if not sol.optimal:
            raise SolveError(sol.status, f"horizon {problem.years[m]} dispatch is {sol.status}")
        out.append(sub.block_solution(sol))
    return out


def solve_closed(
    problem: PathwayProblem,
    milp_opts: MilpOptions | None = None,
    lp_opts: SolverOptions | None = None,
) -> PathwaySolution:
    """Solve the monolithic problem (LP, or MILP when learning curves are encoded)."""
    t0 = time.perf_counter()
    p = problem.closed_problem()
    n_x = problem.block_offsets()[-1]
    if problem.is_mip:
        opts = milp_opts or MilpOptions(gap_abs=1e-6, gap_rel=1e-6, lp=lp_opts or SolverOptions())
        res = solve_milp(p, opts)
        if res.x is None:
            raise SolveError(res.status, f"closed pathway problem is {res.status}")
        inv_x = res.x[n_x:]
        blocks = dispatch_at(problem, inv_x[: problem.n_z], opts.lp)
        return summarize(
            problem, "closed", res.status, res.objective, res.bound, inv_x, blocks, res.nodes, time.perf_counter() - t0
        )
    sol = solve_lp(p.lp, lp_opts)
    if not sol.optimal:
        if sol.status == INFEASIBLE:
            raise SolveError(sol.status, "closed pathway problem is infeasible")
        raise SolveError(sol.status, f"closed pathway problem is {sol.status}")
    blocks = [problem.block_solution(m, sol.x, sol.duals) for m in range(problem.M)]
    return summarize(
        problem,
        "closed",
        sol.status,
        sol.objective,
        sol.objective,
        sol.x[n_x:],
        blocks,
        sol.iterations,
        time.perf_counter() - t0,
    )


def horizon_setup(s: Scenario, year: int | None = None) -> tuple[Scenario, DispatchConfig, int]:
    """Year-specific scenario and dispatch config for a single-horizon run.

    Without a pathway section the scenario is used as is and the year is 0.
    """
    if s.pathway is None:
        if year is not None:
            raise ValueError("scenario has no pathway years to select from")
        return s, DispatchConfig.from_scenario(s), 0
    spec = PathwaySpec.from_scenario(s)
    year = spec.years[0] if year is None else year
    if year not in spec.years:
        raise ValueError(f"{year} is not a pathway year {list(spec.years)}")
    return s.for_year(year), spec.configs[spec.years.index(year)], year


def _checked(sol: LpSolution, what: str) -> LpSolution:
    if not sol.optimal:
        raise SolveError(sol.status, f"{what} is {sol.status}")
    return sol


def solve_dispatch(s: Scenario, year: int | None = None, opts: SolverOptions | None = None) -> PathwaySolution:
    """Dispatch of one horizon with fixed capacities; costs are horizon totals."""
    t0 = time.perf_counter()
    sc, cfg, year = horizon_setup(s, year)
    lp, vmap = build_dispatch_lp(sc, cfg)
    sol = _checked(solve_lp(lp, opts), "dispatch problem")
    return PathwaySolution(
        method="closed",
        costs="linear",
        status=sol.status,
        objective=sol.objective,
        bound=sol.objective,
        iterations=sol.iterations,
        years=(year,),
        z={},
        technology={},
        operating_cost=np.array([sol.objective]),
        investment_cost=np.zeros(1),
        dispatch=[extract_dispatch_solution(sol, vmap, lp)],
        seconds=time.perf_counter() - t0,
        mode="dispatch",
    )


def solve_eacp(s: Scenario, year: int | None = None, opts: SolverOptions | None = None) -> PathwaySolution:
    """Single horizon with annualized investment columns (horizon-scaled costs)."""
    t0 = time.perf_counter()
    sc, cfg, year = horizon_setup(s, year)
    lp, vmap = build_eacp(sc, cfg, year=year or None)
    sol = _checked(solve_lp(lp, opts), "equivalent annual cost problem")
    zi = [i for i, key in enumerate(vmap.columns) if key[0] == "z"]
    inv = float(lp.c[zi] @ sol.x[zi])
    z = {vmap.columns[i][1]: np.array([sol.x[i]]) for i in zi}
    tech: dict[str, np.ndarray] = {}
    for o in sc.options:
        tech.setdefault(o.technology, np.zeros(1))[0] += z[o.id][0]
    n = min(zi) if zi else len(vmap.columns)
    dvmap = VariableMap(vmap.columns[:n], vmap.rows, vmap.owners, vmap.n_steps, vmap.step_hours)
    return PathwaySolution(
        method="closed",
        costs="linear",
        status=sol.status,
        objective=sol.objective,
        bound=sol.objective,
        iterations=sol.iterations,
        years=(year,),
        z=z,
        technology=tech,
        operating_cost=np.array([sol.objective - inv]),
        investment_cost=np.array([inv]),
        dispatch=[extract_dispatch_solution(sol, dvmap, lp)],
        seconds=time.perf_counter() - t0,
        mode="eacp",
    )


def make_pathway(s: Scenario, costs: str = "linear", n_pw: int | None = None) -> PathwayProblem:
    """Pathway problem of a scenario, with learning curves encoded when ``costs == "learning"``.

    ``n_pw`` defaults to the scenario's solver setting, else 10.
    """
    if costs not in ("linear", "learning"):
        raise ValueError(f"unknown cost model {costs!r}")
    problem = build_pathway_problem(PathwaySpec.from_scenario(s), s)
    if costs == "linear":
        return problem
    if not s.learning:
        raise ValueError("scenario defines no learning curves")
    n_pw = int(n_pw or s.solver.get("n_pw", 10))
    curves = {t: LearningCurve(lp.c0, lp.p0, lp.r, n_pw=n_pw) for t, lp in s.learning.items()}
    return encode_pw_blocks(problem, curves)
