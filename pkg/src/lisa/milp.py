"""Branch-and-bound over binary columns and SOS2 groups.

Node relaxations are solved on a single warm-started ``LpSession``. SOS2
groups are branched by set splitting, binaries by fixing. Nodes are taken
best-bound first with depth-first plunging; ties go to the lower sequence
number, so runs are deterministic.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from lisa.lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpError,
    LpSession,
    SolverOptions,
    StandardFormLP,
)

log = logging.getLogger(__name__)

NODE_LIMIT = "node_limit"
TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class MilpProblem:
    lp: StandardFormLP
    binaries: tuple[int, ...] = ()
    sos2: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        binaries = tuple(int(j) for j in self.binaries)
        sos2 = tuple(tuple(int(j) for j in g) for g in self.sos2)
        object.__setattr__(self, "binaries", binaries)
        object.__setattr__(self, "sos2", sos2)
        lb, ub = self.lp.lb, self.lp.ub
        seen: set[int] = set()
        for j in binaries + tuple(j for g in sos2 for j in g):
            if lb[j] < 0.0 or ub[j] > 1.0:
                raise ValueError(f"column {j} must have bounds within [0, 1]")
        for g in sos2:
            if seen.intersection(g):
                raise ValueError("SOS2 groups must be disjoint")
            seen.update(g)


@dataclass(frozen=True)
class MilpOptions:
    gap_abs: float = 1e-6
    gap_rel: float = 0.0
    int_tol: float = 1e-6
    node_limit: int | None = None
    time_limit: float | None = None
    lp: SolverOptions = field(default_factory=SolverOptions)


@dataclass
class MilpSolution:
    status: str
    x: np.ndarray | None
    objective: float
    bound: float
    nodes: int
    lp_iterations: int = 0

    @property
    def gap_abs(self) -> float:
        return abs(self.objective - self.bound) if self.x is not None else np.inf

    @property
    def gap_rel(self) -> float:
        return self.gap_abs / max(1.0, abs(self.objective))

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def sos2_ok(values: np.ndarray, tol: float) -> bool:
    nz = np.flatnonzero(values > tol)
    return len(nz) <= 1 or (len(nz) == 2 and nz[1] == nz[0] + 1)


def is_feasible(p: MilpProblem, x: np.ndarray, tol: float = 1e-6) -> bool:
    """Rows, bounds, integrality and SOS2 adjacency of ``x`` within ``tol`` (scaled)."""
    lp = p.lp
    ax = lp.A @ x
    scale = 1.0 + np.abs(lp.b)
    if np.any((ax - lp.b) / scale > tol):
        return False
    eq = lp.senses == "E"
    if np.any(np.abs(ax[eq] - lp.b[eq]) / scale[eq] > tol):
        return False
    if np.any(x < lp.lb - tol * (1 + np.abs(lp.lb))) or np.any(x > lp.ub + tol * (1 + np.abs(lp.ub))):
        return False
    xb = x[list(p.binaries)]
    if np.any(np.minimum(np.abs(xb), np.abs(xb - 1.0)) > tol):
        return False
    return all(sos2_ok(x[list(g)], tol) for g in p.sos2)


class _Search:
    def __init__(self, p: MilpProblem, opts: MilpOptions):
        self.p = p
        self.opts = opts
        self.session = LpSession(p.lp, opts.lp)
        self.base_lb = np.array(p.lp.lb)
        self.base_ub = np.array(p.lp.ub)
        self.applied: dict[int, tuple[float, float]] = {}
        self.nodes = 0
        self.lp_iterations = 0
        self.inc_x: np.ndarray | None = None
        self.inc_obj = np.inf
        self.pruned_bound = np.inf
        self.seq = 0

    def cutoff(self) -> float:
        if self.inc_x is None:
            return np.inf
        return self.inc_obj - max(self.opts.gap_abs, self.opts.gap_rel * abs(self.inc_obj))

    def _apply(self, fixes: dict[int, tuple[float, float]]):
        cols, lbs, ubs = [], [], []
        for j in self.applied:
            if j not in fixes:
                cols.append(j)
                lbs.append(self.base_lb[j])
                ubs.append(self.base_ub[j])
        for j, (lo, hi) in fixes.items():
            if self.applied.get(j) != (lo, hi):
                cols.append(j)
                lbs.append(lo)
                ubs.append(hi)
        self.session.set_col_bounds(cols, lbs, ubs)
        self.applied = dict(fixes)

    def offer(self, x: np.ndarray):
        x = self.clean(x)
        obj = float(self.p.lp.c @ x + self.p.lp.offset)
        if obj < self.inc_obj and is_feasible(self.p, x, max(self.opts.int_tol, 1e-6)):
            self.inc_x, self.inc_obj = x, obj
            return True
        return False

    def clean(self, x: np.ndarray) -> np.ndarray:
        x = x.copy()
        tol = self.opts.int_tol
        for j in self.p.binaries:
            x[j] = float(round(x[j]))
        for g in self.p.sos2:
            idx = np.asarray(g)
            small = x[idx] <= tol
            x[idx[small]] = 0.0
        return x

    def branch(self, x: np.ndarray, fixes: dict[int, tuple[float, float]]):
        """Return children fix-sets, preferred child first; ``None`` if ``x`` is feasible."""
        tol = self.opts.int_tol
        for g in self.p.sos2:
            vals = x[list(g)]
            if sos2_ok(vals, tol):
                continue
            nz = np.flatnonzero(vals > tol)
            first, last = int(nz[0]), int(nz[-1])
            w = vals[nz]
            r = int(round(float(nz @ w) / float(w.sum())))
            r = min(max(r, first + 1), last - 1)
            left = dict(fixes)
            for k in range(r + 1, len(g)):
                left[g[k]] = (self.base_lb[g[k]], 0.0)
            right = dict(fixes)
            for k in range(0, r):
                right[g[k]] = (self.base_lb[g[k]], 0.0)
            if vals[: r + 1].sum() >= vals[r:].sum():
                return [left, right]
            return [right, left]
        best, best_frac = None, tol
        for j in self.p.binaries:
            frac = min(x[j], 1.0 - x[j])
            if frac > best_frac:
                best, best_frac = j, frac
        if best is None:
            return None
        down = dict(fixes)
        down[best] = (0.0, 0.0)
        up = dict(fixes)
        up[best] = (1.0, 1.0)
        return [up, down] if x[best] >= 0.5 else [down, up]

    def run(self, start: np.ndarray | None) -> MilpSolution:
        t0 = time.monotonic()
        if start is not None:
            self.offer(np.asarray(start, dtype=float))
        heap: list[tuple[float, int, dict]] = []
        current: dict | None = {}
        current_bound = -np.inf
        status = OPTIMAL
        while True:
            if current is None:
                while heap:
                    bound, _, node = heapq.heappop(heap)
                    if bound < self.cutoff():
                        current, current_bound = node, bound
                        break
                    self.pruned_bound = min(self.pruned_bound, bound)
                if current is None:
                    break
            if self.opts.node_limit is not None and self.nodes >= self.opts.node_limit:
                status = NODE_LIMIT
                heapq.heappush(heap, (current_bound, self.seq, current))
                break
            if self.opts.time_limit is not None and time.monotonic() - t0 > self.opts.time_limit:
                status = TIME_LIMIT
                heapq.heappush(heap, (current_bound, self.seq, current))
                break
            self._apply(current)
            sol = self.session.solve()
            self.nodes += 1
            self.lp_iterations += sol.iterations
            fixes, current = current, None
            if sol.status == INFEASIBLE:
                continue
            if sol.status == UNBOUNDED:
                if self.nodes == 1:
                    return MilpSolution(UNBOUNDED, None, -np.inf, -np.inf, self.nodes, self.lp_iterations)
                # a bounded root cannot have unbounded children
                raise LpError(UNBOUNDED, "node relaxation reported unbounded below a bounded root")
            if sol.status != OPTIMAL:
                raise LpError(sol.status, f"node relaxation failed: {sol.status}")
            if sol.objective >= self.cutoff():
                self.pruned_bound = min(self.pruned_bound, sol.objective)
                continue
            children = self.branch(sol.x, fixes)
            if children is None:
                self.offer(sol.x)
                continue
            for child in children[1:]:
                self.seq += 1
                heapq.heappush(heap, (sol.objective, self.seq, child))
            current, current_bound = children[0], sol.objective
        open_bound = min((b for b, _, _ in heap), default=np.inf)
        if self.inc_x is None:
            if status == OPTIMAL:
                return MilpSolution(INFEASIBLE, None, np.inf, np.inf, self.nodes, self.lp_iterations)
            return MilpSolution(status, None, np.inf, open_bound, self.nodes, self.lp_iterations)
        bound = min(self.inc_obj, self.pruned_bound, open_bound)
        log.debug("B&B finished: %s nodes, objective %.10g, bound %.10g", self.nodes, self.inc_obj, bound)
        return MilpSolution(status, self.inc_x, self.inc_obj, bound, self.nodes, self.lp_iterations)


def solve_milp(p: MilpProblem, opts: MilpOptions | None = None, start: np.ndarray | None = None) -> MilpSolution:
    """Minimize ``p`` by branch-and-bound.

    ``start`` is an optional feasible point used as the first incumbent.
    On node or time limits the best incumbent is returned with its bound.
    """
    return _Search(p, opts or MilpOptions()).run(start)
