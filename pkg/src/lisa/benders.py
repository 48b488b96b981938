"""Benders decomposition of the pathway problem.

The master holds the investment side (``z`` plus any learning encoding)
and a scalar ``alpha`` bounding total discounted operating cost from below.
Each iteration pins the master's ``z`` in every horizon subproblem and adds
the optimality cut ``alpha >= sum_m cost_m + sum_m lambda_m' (z - z*)``.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from lisa.investment import PathwayProblem
from lisa.learning import encoding_at
from lisa.lp import LE, LpSession, LpSolution, SolverOptions, StandardFormLP
from lisa.milp import MilpOptions, MilpProblem, MilpSolution, solve_milp
from lisa.model import SolveError
from lisa.pathway import PathwaySolution, Subproblem, build_subproblem, summarize

__all__ = [
    "BendersLog",
    "Cut",
    "MasterState",
    "alpha_floor",
    "build_subproblem",
    "make_cut",
    "run_benders",
    "solve_master",
]

log = logging.getLogger(__name__)

EPS_DEFAULT = 1e-4
ABS_FLOOR = 1e-6


@dataclass(frozen=True)
class Cut:
    """``alpha_g >= const + coef' z`` with ``const = cost - coef' z_ref``."""

    iteration: int
    z_ref: np.ndarray
    costs: np.ndarray  # weighted subproblem costs, per horizon
    duals: np.ndarray  # (M, n_z) d cost_m / d z
    groups: tuple[tuple[int, ...], ...]  # horizons aggregated into each alpha

    def rows(self) -> list[tuple[int, float, np.ndarray]]:
        """``(alpha index, constant, coefficients)`` per aggregated group."""
        out = []
        for g, members in enumerate(self.groups):
            idx = list(members)
            coef = self.duals[idx].sum(axis=0)
            cost = float(self.costs[idx].sum())
            out.append((g, cost - float(coef @ self.z_ref), coef))
        return out

    def value(self, z: np.ndarray) -> np.ndarray:
        """Right-hand side of each aggregated cut at ``z``."""
        return np.array([c + coef @ z for _, c, coef in self.rows()])


def alpha_floor(pathway: PathwayProblem, groups) -> np.ndarray:
    """Lower bound on each aggregated operating cost.

    Zero when all dispatch costs are nonnegative; otherwise the most negative
    value reachable within finite column bounds.
    """
    out = []
    for members in groups:
        total = 0.0
        for m in members:
            blk = pathway.blocks[m]
            c = blk.weight * blk.lp.c
            neg = c < 0
            if np.any(neg & ~np.isfinite(blk.lp.ub)):
                raise ValueError(f"horizon {pathway.years[m]}: negative cost on an unbounded column")
            pos_lb = (c > 0) & (blk.lp.lb > 0)
            total += float(c[neg] @ blk.lp.ub[neg]) + float(c[pos_lb] @ blk.lp.lb[pos_lb])
            total += blk.weight * blk.lp.offset
        out.append(min(total, 0.0))
    return np.array(out)


@dataclass
class IterationRecord:
    iteration: int
    lb: float
    ub: float  # this iteration's upper bound
    best_ub: float
    z: np.ndarray
    alpha: np.ndarray
    cut: Cut
    seconds: float

    @property
    def gap(self) -> float:
        return self.best_ub - self.lb


@dataclass
class BendersLog:
    z_names: tuple[str, ...]
    records: list[IterationRecord] = field(default_factory=list)
    converged: bool = False

    @property
    def lower_bounds(self) -> np.ndarray:
        return np.array([r.lb for r in self.records])

    @property
    def upper_bounds(self) -> np.ndarray:
        return np.array([r.best_ub for r in self.records])

    def to_csv(self, path: str | Path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "LB", "UB", "gap"] + list(self.z_names))
            for r in self.records:
                w.writerow([r.iteration, repr(float(r.lb)), repr(float(r.best_ub)), repr(float(r.gap))] + [repr(float(v)) for v in r.z])

    @classmethod
    def read_csv(cls, path: str | Path) -> "BendersLog":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        head, body = rows[0], rows[1:]
        log_ = cls(tuple(head[4:]))
        for row in body:
            lb, ub = float(row[1]), float(row[2])
            z = np.array([float(v) for v in row[4:]])
            empty = Cut(int(row[0]), z, np.zeros(0), np.zeros((0, len(z))), ())
            log_.records.append(IterationRecord(int(row[0]), lb, ub, ub, z, np.zeros(0), empty, 0.0))
        return log_


@dataclass
class MasterState:
    """Master problem and loop bookkeeping.

    The master LP is kept in a scaled objective unit: column ``alpha`` holds
    ``alpha / unit`` and costs and cut rows are divided by ``unit``, so cut
    right-hand sides stay near 1 whatever the size of the system.
    """

    pathway: PathwayProblem
    groups: tuple[tuple[int, ...], ...]
    lp: StandardFormLP  # columns [z, ext, alpha...]; rows F, ext, cuts
    binaries: tuple[int, ...]
    sos2: tuple[tuple[int, ...], ...]
    unit: float = 1.0
    cuts: list[Cut] = field(default_factory=list)
    iteration: int = 0
    lb: float = -np.inf
    best_ub: float = np.inf
    best_x: np.ndarray | None = None  # investment vector [z, ext] of the best incumbent
    best_blocks: list[LpSolution] | None = None
    last_x: np.ndarray | None = None  # last master vector, scaled units
    session: LpSession | None = None
    lp_opts: SolverOptions = field(default_factory=SolverOptions)
    gap_rel: float = 1e-6
    relaxed: bool = False  # solve the master as its LP relaxation

    @property
    def n_inv(self) -> int:
        return self.pathway.n_z + self.pathway.n_ext

    @property
    def is_mip(self) -> bool:
        return bool(self.binaries or self.sos2)

    @classmethod
    def create(
        cls,
        pathway: PathwayProblem,
        multi_cut: bool = False,
        lp_opts: SolverOptions | None = None,
        gap_rel: float = 1e-6,
        unit: float = 1.0,
    ) -> "MasterState":
        groups = tuple((m,) for m in range(pathway.M)) if multi_cut else (tuple(range(pathway.M)),)
        state = cls(pathway, groups, None, (), (), unit, lp_opts=lp_opts or SolverOptions(), gap_rel=gap_rel)
        state.lp = state._base_lp()
        n_z = pathway.n_z
        if pathway.ext is not None:
            state.binaries = tuple(n_z + j for j in pathway.ext.binaries)
            state.sos2 = tuple(tuple(n_z + j for j in g) for g in pathway.ext.sos2)
        return state

    def _base_lp(self) -> StandardFormLP:
        A, b, senses, row_names = self.pathway.investment_rows()
        c, lb, ub, names = self.pathway.investment_columns()
        n_a = len(self.groups)
        floor = alpha_floor(self.pathway, self.groups)
        return StandardFormLP(
            c=np.concatenate([c / self.unit, np.ones(n_a)]),
            A=sp.hstack([A, sp.csr_matrix((A.shape[0], n_a))], format="csc"),
            b=b,
            senses=senses,
            lb=np.concatenate([lb, floor / self.unit]),
            ub=np.concatenate([ub, np.full(n_a, np.inf)]),
            col_names=names + tuple(f"alpha{g}" for g in range(n_a)),
            row_names=row_names,
        )

    def set_unit(self, unit: float):
        """Rebuild the master (with all cuts) in a new objective unit."""
        if unit == self.unit:
            return
        if self.last_x is not None:
            self.last_x = self.last_x.copy()
            self.last_x[self.n_inv :] *= self.unit / unit
        self.unit = unit
        self.session = None
        cuts, self.cuts = self.cuts, []
        self.lp = self._base_lp()
        for cut in cuts:
            self.add_cut(cut)

    def add_cut(self, cut: Cut):
        rows, b = [], []
        n = self.lp.n_cols
        for g, const, coef in cut.rows():
            row = np.zeros(n)
            row[: self.pathway.n_z] = coef / self.unit
            row[self.n_inv + g] = -1.0
            rows.append(row)
            b.append(-const / self.unit)
            if self.session is not None:
                self.session.add_row({j: v for j, v in enumerate(row) if v != 0.0}, LE, -const / self.unit)
        self.lp = self.lp.append_rows(sp.csr_matrix(np.array(rows)), [LE] * len(rows), b)
        self.cuts.append(cut)


def solve_master(state: MasterState) -> tuple[np.ndarray, np.ndarray, float]:
    """Minimize investment cost plus ``alpha`` under all cuts so far.

    Returns ``(z*, alpha*, proven lower bound)`` in EUR; pure LP masters are
    re-solved warm from the previous basis.
    """
    n_inv = state.n_inv
    if not state.is_mip or state.relaxed:
        if state.session is None:
            state.session = LpSession(state.lp, state.lp_opts)
        sol = state.session.solve()
        if not sol.optimal:
            raise SolveError(sol.status, f"master problem is {sol.status}; check the investment rows")
        x, bound = sol.x, sol.objective
    else:
        start = None
        if state.last_x is not None:
            start = state.last_x.copy()
            start[n_inv:] = state.lp.lb[n_inv:]
            # lift alpha onto every cut so the old incumbent stays feasible
            for cut in state.cuts:
                for g, const, coef in cut.rows():
                    a = n_inv + g
                    start[a] = max(start[a], (const + coef @ start[: state.pathway.n_z]) / state.unit)
        opts = MilpOptions(gap_abs=1e-9, gap_rel=state.gap_rel, lp=state.lp_opts)
        res: MilpSolution = solve_milp(MilpProblem(state.lp, state.binaries, state.sos2), opts, start)
        if res.x is None:
            raise SolveError(res.status, f"master problem is {res.status}; check the investment rows")
        x, bound = res.x, res.bound
    state.last_x = x
    return x[: state.pathway.n_z], x[n_inv:] * state.unit, float(bound) * state.unit


def make_cut(iteration: int, z_ref: np.ndarray, results, groups) -> Cut:
    """Cut from per-horizon ``(solution, gradient)`` pairs, all of which must be optimal."""
    bad = [m for m, (sol, _) in enumerate(results) if not sol.optimal]
    if bad:
        raise SolveError(results[bad[0]][0].status, f"subproblem(s) {bad} not optimal; cannot build a cut")
    costs = np.array([sol.objective for sol, _ in results])
    duals = np.array([g for _, g in results]).reshape(len(results), len(z_ref))
    # dual noise far below the largest sensitivity only hurts the master's conditioning
    duals[np.abs(duals) <= 1e-12 * max(1.0, np.abs(duals).max(initial=0.0))] = 0.0
    return Cut(iteration, np.array(z_ref, dtype=float), costs, duals, tuple(groups))


def run_benders(
    pathway: PathwayProblem,
    eps: float = EPS_DEFAULT,
    max_iter: int = 1000,
    multi_cut: bool = False,
    workers: int = 1,
    lp_opts: SolverOptions | None = None,
    relaxed_start: bool = True,
) -> tuple[PathwaySolution, BendersLog]:
    """Iterate master and subproblems until ``UB - LB <= max(eps*|UB|, 1e-6)``.

    ``eps = inf`` stops after the first iteration. On ``max_iter`` the best
    incumbent is returned with status ``iteration_limit`` and its gap.

    With a mixed-integer master and ``relaxed_start`` the first iterations
    use the master's LP relaxation until that relaxation has converged to
    ``eps``. Cuts do not depend on the master's integrality, so they carry
    over; upper bounds always price ``z`` on the exact piecewise curve.
    """
    if eps < 0:
        raise ValueError("tolerance must be nonnegative")
    t0 = time.perf_counter()
    lp_opts = lp_opts or SolverOptions()
    master_gap = min(1e-6, eps / 10.0) if np.isfinite(eps) else 1e-6
    state = MasterState.create(pathway, multi_cut, lp_opts, master_gap)
    state.relaxed = relaxed_start and state.is_mip
    subs = [Subproblem(m, pathway, lp_opts) for m in range(pathway.M)]
    names = tuple(f"z[{z.option},{z.year}]" for z in pathway.z)
    blog = BendersLog(names)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    c_inv = pathway.investment_columns()[0]
    status = "iteration_limit"

    def stop(ub, lb):
        return ub - lb <= max(eps * abs(ub), ABS_FLOOR)

    try:
        for it in range(1, max_iter + 1):
            state.iteration = it
            z, alpha, bound = solve_master(state)
            state.lb = max(state.lb, bound)
            z = np.clip(z, 0.0, pathway.z_ub)
            if pool is None:
                results = [s.solve(z) for s in subs]
            else:
                results = list(pool.map(lambda s: s.solve(z), subs))
            cut = make_cut(it, z, results, state.groups)
            x_inv = state.last_x[: state.n_inv]
            if state.relaxed:
                relaxed_ub = float(c_inv @ x_inv) + float(cut.costs.sum())
                x_inv = np.concatenate([z, encoding_at(pathway, z)])
            ub = float(c_inv @ x_inv) + float(cut.costs.sum())
            if ub < state.best_ub:
                state.best_ub = ub
                state.best_x = x_inv.copy()
                state.best_blocks = [s.block_solution(r[0]) for s, r in zip(subs, results)]
            rec = IterationRecord(it, state.lb, ub, state.best_ub, z.copy(), alpha.copy(), cut, time.perf_counter() - t0)
            blog.records.append(rec)
            log.info("benders %d: LB %.10g UB %.10g gap %.3g", it, state.lb, state.best_ub, rec.gap)
            if stop(state.best_ub, state.lb):
                status = "optimal"
                blog.converged = True
                break
            if state.relaxed and stop(relaxed_ub, bound):
                log.info("benders %d: relaxed master converged, switching to the integer master", it)
                state.relaxed = False
                state.session = None
                state.last_x = np.concatenate([state.best_x, np.zeros(len(state.groups))])
            if it == 1:
                state.set_unit(10.0 ** np.floor(np.log10(max(abs(ub), 1.0))))
            state.add_cut(cut)
    finally:
        if pool is not None:
            pool.shutdown()
    if status != "optimal":
        log.warning("benders stopped after %d iterations with gap %.3g", max_iter, state.best_ub - state.lb)
    sol = summarize(
        pathway,
        "benders",
        status,
        state.best_ub,
        state.lb,
        state.best_x,
        state.best_blocks,
        iterations=len(blog.records),
        seconds=time.perf_counter() - t0,
        log_obj=blog,
    )
    return sol, blog
