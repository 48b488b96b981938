"""Sparse LP kernel.

Problems are held in a small standard form (``StandardFormLP``) with rows of
sense ``"L"`` (``a x <= b``) or ``"E"`` (``a x == b``) and box bounds on the
columns. Solving goes through HiGHS' simplex so every optimal result is a
basic solution with exact row duals. Row duals follow the sensitivity
convention ``dual_i = d(objective) / d(b_i)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import highspy
import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

LE = "L"
EQ = "E"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"
NUMERICAL = "numerical_error"


class LpError(RuntimeError):
    """Raised when a solve that must be optimal is not."""

    def __init__(self, status: str, message: str = ""):
        super().__init__(message or f"LP not solved to optimality: {status}")
        self.status = status


@dataclass(frozen=True)
class StandardFormLP:
    """``min c x + offset  s.t.  A x (<=|==) b,  lb <= x <= ub``."""

    c: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    senses: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    col_names: tuple[str, ...] | None = None
    row_names: tuple[str, ...] | None = None
    offset: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        A = sp.csc_matrix(self.A, dtype=float)
        A.sum_duplicates()
        A.sort_indices()
        b = np.asarray(self.b, dtype=float)
        senses = np.asarray(self.senses, dtype="<U1")
        lb = np.asarray(self.lb, dtype=float)
        ub = np.asarray(self.ub, dtype=float)
        m, n = A.shape
        if c.shape != (n,) or lb.shape != (n,) or ub.shape != (n,):
            raise ValueError(f"column data must have length {n}")
        if b.shape != (m,) or senses.shape != (m,):
            raise ValueError(f"row data must have length {m}")
        if not np.all(np.isfinite(c)) or not np.all(np.isfinite(A.data)) or not np.all(np.isfinite(b)):
            raise ValueError("c, A and b must be finite")
        if np.any(np.isnan(lb)) or np.any(np.isnan(ub)) or np.any(lb > ub):
            raise ValueError("bounds must satisfy lb <= ub")
        if m and not np.all(np.isin(senses, (LE, EQ))):
            raise ValueError("row senses must be 'L' or 'E'")
        for arr in (c, b, senses, lb, ub, A.data, A.indices, A.indptr):
            arr.flags.writeable = False
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self.A.tocoo()
        return coo.row, coo.col, coo.data

    def replace(self, **changes) -> "StandardFormLP":
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return StandardFormLP(**data)

    def append_rows(self, A_new, senses: Sequence[str], b_new, names=None) -> "StandardFormLP":
        A_new = sp.csc_matrix(A_new, shape=(len(b_new), self.n_cols))
        row_names = None
        if self.row_names is not None:
            names = names or [f"r{self.n_rows + i}" for i in range(len(b_new))]
            row_names = self.row_names + tuple(names)
        return self.replace(
            A=sp.vstack([self.A, A_new], format="csc"),
            b=np.concatenate([self.b, np.asarray(b_new, dtype=float)]),
            senses=np.concatenate([self.senses, np.asarray(senses, dtype="<U1")]),
            row_names=row_names,
        )

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.A @ x


class LpBuilder:
    """Incremental assembly of a ``StandardFormLP`` from named columns and rows."""

    def __init__(self):
        self.c: list[float] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.col_names: list[str] = []
        self.b: list[float] = []
        self.senses: list[str] = []
        self.row_names: list[str] = []
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []
        self.offset = 0.0

    @property
    def n_cols(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.b)

    def add_col(self, name: str, cost: float = 0.0, lb: float = 0.0, ub: float = np.inf) -> int:
        self.c.append(float(cost))
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.col_names.append(name)
        return len(self.c) - 1

    def add_row(self, name: str, coefs: Iterable[tuple[int, float]], sense: str, rhs: float) -> int:
        """Add a row; ``sense`` is ``"L"``, ``"E"`` or ``"G"`` (stored negated as ``"L"``)."""
        i = len(self.b)
        sign = 1.0
        if sense == "G":
            sign, sense = -1.0, LE
        for j, v in coefs:
            if v != 0.0:
                self._rows.append(i)
                self._cols.append(j)
                self._vals.append(sign * float(v))
        self.b.append(sign * float(rhs))
        self.senses.append(sense)
        self.row_names.append(name)
        return i

    def set_cost(self, j: int, cost: float):
        self.c[j] = float(cost)

    def build(self) -> StandardFormLP:
        A = sp.coo_matrix(
            (self._vals, (self._rows, self._cols)), shape=(len(self.b), len(self.c))
        ).tocsc()
        return StandardFormLP(
            c=np.array(self.c),
            A=A,
            b=np.array(self.b),
            senses=np.array(self.senses, dtype="<U1"),
            lb=np.array(self.lb),
            ub=np.array(self.ub),
            col_names=tuple(self.col_names),
            row_names=tuple(self.row_names),
            offset=self.offset,
        )


@dataclass(frozen=True)
class SolverOptions:
    primal_tol: float = 1e-7
    dual_tol: float = 1e-7
    max_iter: int | None = None
    time_limit: float | None = None
    scale: bool = False  # external geometric scaling; HiGHS scales internally either way
    method: str = "highs"


@dataclass
class LpSolution:
    status: str
    x: np.ndarray
    objective: float
    duals: np.ndarray
    reduced_costs: np.ndarray
    col_basis: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    row_basis: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    iterations: int = 0
    pin_duals: np.ndarray | None = None
    cause: str | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def require_optimal(self) -> "LpSolution":
        if not self.optimal:
            raise LpError(self.status)
        return self


def _pow2(v: np.ndarray) -> np.ndarray:
    # powers of two keep scaling exact in floating point
    return np.exp2(np.round(np.log2(v)))


SCALE_LIMIT = 2.0**16


def geometric_scaling(A: sp.csc_matrix, passes: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Row and column factors ``r, s`` such that ``diag(r) A diag(s)`` is equilibrated.

    Factors are powers of two clipped to ``[1/SCALE_LIMIT, SCALE_LIMIT]``;
    wider ranges tend to hand the simplex badly conditioned bounds.
    """
    m, n = A.shape
    r = np.ones(m)
    s = np.ones(n)
    if A.nnz == 0:
        return r, s
    absA = abs(sp.csr_matrix(A))
    for _ in range(passes):
        M = sp.diags(r) @ absA @ sp.diags(s)
        M = sp.csr_matrix(M)
        rmax = M.max(axis=1).toarray().ravel()
        rmin = _nonzero_min(M, axis=1)
        ok = rmax > 0
        r[ok] /= np.sqrt(rmax[ok] * rmin[ok])
        M = sp.csc_matrix(sp.diags(r) @ absA @ sp.diags(s))
        cmax = M.max(axis=0).toarray().ravel()
        cmin = _nonzero_min(M, axis=0)
        ok = cmax > 0
        s[ok] /= np.sqrt(cmax[ok] * cmin[ok])
        r = np.clip(r, 1.0 / SCALE_LIMIT, SCALE_LIMIT)
        s = np.clip(s, 1.0 / SCALE_LIMIT, SCALE_LIMIT)
    return _pow2(r), _pow2(s)


def _nonzero_min(M, axis: int) -> np.ndarray:
    inv = M.copy()
    inv.data = 1.0 / inv.data
    mx = inv.max(axis=axis).toarray().ravel()
    out = np.ones_like(mx)
    ok = mx > 0
    out[ok] = 1.0 / mx[ok]
    return out


_STATUS = {
    highspy.HighsModelStatus.kOptimal: OPTIMAL,
    highspy.HighsModelStatus.kInfeasible: INFEASIBLE,
    highspy.HighsModelStatus.kUnbounded: UNBOUNDED,
    highspy.HighsModelStatus.kIterationLimit: ITERATION_LIMIT,
    highspy.HighsModelStatus.kTimeLimit: ITERATION_LIMIT,
    highspy.HighsModelStatus.kModelEmpty: OPTIMAL,
}


class LpSession:
    """A loaded LP that can be modified and re-solved from the previous basis.

    Used by branch-and-bound (bound changes) and Benders (pin right-hand sides).
    All arguments and results are in unscaled units.
    """

    def __init__(self, lp: StandardFormLP, opts: SolverOptions | None = None):
        self.opts = opts or SolverOptions()
        self.lp = lp
        if self.opts.scale:
            self.row_scale, self.col_scale = geometric_scaling(lp.A)
        else:
            self.row_scale, self.col_scale = np.ones(lp.n_rows), np.ones(lp.n_cols)
        self.c = np.array(lp.c)
        self.offset = lp.offset
        self.h = highspy.Highs()
        self._configure()
        self._load(lp)

    def _configure(self):
        h, o = self.h, self.opts
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        h.setOptionValue("solver", "simplex")
        h.setOptionValue("threads", 1)
        h.setOptionValue("random_seed", 0)
        h.setOptionValue("primal_feasibility_tolerance", o.primal_tol)
        h.setOptionValue("dual_feasibility_tolerance", o.dual_tol)
        if o.max_iter is not None:
            h.setOptionValue("simplex_iteration_limit", int(o.max_iter))
        if o.time_limit is not None:
            h.setOptionValue("time_limit", float(o.time_limit))

    def _load(self, lp: StandardFormLP):
        r, s = self.row_scale, self.col_scale
        A = sp.csc_matrix(sp.diags(r) @ lp.A @ sp.diags(s))
        A.sort_indices()
        model = highspy.HighsLp()
        model.num_col_ = lp.n_cols
        model.num_row_ = lp.n_rows
        model.col_cost_ = lp.c * s
        model.col_lower_ = lp.lb / s
        model.col_upper_ = lp.ub / s
        rb = lp.b * r
        model.row_lower_ = np.where(lp.senses == EQ, rb, -np.inf)
        model.row_upper_ = rb
        model.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        model.a_matrix_.start_ = A.indptr.astype(np.int32)
        model.a_matrix_.index_ = A.indices.astype(np.int32)
        model.a_matrix_.value_ = A.data
        model.offset_ = lp.offset
        self.h.passModel(model)

    @property
    def n_rows(self) -> int:
        return len(self.row_scale)

    @property
    def n_cols(self) -> int:
        return len(self.col_scale)

    def set_col_bounds(self, cols: Sequence[int], lb: Sequence[float], ub: Sequence[float]):
        cols = np.asarray(cols, dtype=np.int32)
        if len(cols) == 0:
            return
        s = self.col_scale[cols]
        self.h.changeColsBounds(len(cols), cols, np.asarray(lb, float) / s, np.asarray(ub, float) / s)

    def set_costs(self, cols: Sequence[int], costs: Sequence[float]):
        cols = np.asarray(cols, dtype=np.int32)
        self.c[cols] = costs
        self.h.changeColsCost(len(cols), cols, np.asarray(costs, float) * self.col_scale[cols])

    def add_row(self, coefs: dict[int, float] | Sequence[tuple[int, float]], sense: str, rhs: float) -> int:
        items = sorted(dict(coefs).items())
        idx = np.array([j for j, _ in items], dtype=np.int32)
        val = np.array([v for _, v in items], dtype=float) * self.col_scale[idx] if items else np.zeros(0)
        nz = np.abs(val[val != 0])
        rs = 1.0
        if self.opts.scale and len(nz):
            rs = float(_pow2(np.clip([1.0 / np.sqrt(nz.max() * nz.min())], 1.0 / SCALE_LIMIT, SCALE_LIMIT))[0])
        lo = rhs * rs if sense == EQ else -np.inf
        self.h.addRow(lo, rhs * rs, len(idx), idx, val * rs)
        self.row_scale = np.append(self.row_scale, rs)
        return len(self.row_scale) - 1

    def set_rhs(self, rows: Sequence[int], rhs: Sequence[float], senses: Sequence[str]):
        rows = np.asarray(rows, dtype=np.int32)
        rb = np.asarray(rhs, float) * self.row_scale[rows]
        lo = np.where(np.asarray(senses) == EQ, rb, -np.inf)
        self.h.changeRowsBounds(len(rows), rows, lo, rb)

    def solve(self) -> LpSolution:
        h = self.h
        status = self._run()
        info = h.getInfo()
        sol = h.getSolution()
        s, r = self.col_scale, self.row_scale
        x = np.array(sol.col_value) * s if len(sol.col_value) else np.zeros(self.n_cols)
        duals = np.array(sol.row_dual) * r if len(sol.row_dual) else np.zeros(self.n_rows)
        rc = np.array(sol.col_dual) / s if len(sol.col_dual) else np.zeros(self.n_cols)
        basis = h.getBasis()
        cb = np.array([int(v) for v in basis.col_status], dtype=int)
        rbs = np.array([int(v) for v in basis.row_status], dtype=int)
        obj = float(self.c @ x + self.offset) if status in (OPTIMAL, ITERATION_LIMIT) else np.nan
        return LpSolution(
            status=status,
            x=x,
            objective=obj,
            duals=duals,
            reduced_costs=rc,
            col_basis=cb,
            row_basis=rbs,
            iterations=int(info.simplex_iteration_count),
        )

    def _run(self) -> str:
        """Run from the current basis; on an inconclusive status retry cold,
        then with primal simplex."""
        h = self.h
        h.run()
        ms = h.getModelStatus()
        attempts = (("cold", None), ("primal", 4))
        for name, strategy in attempts:
            if ms in _STATUS and ms != highspy.HighsModelStatus.kUnbounded:
                break
            if ms == highspy.HighsModelStatus.kUnboundedOrInfeasible:
                return self._disambiguate()
            log.debug("HiGHS status %s; retrying %s", ms, name)
            h.clearSolver()
            if strategy is not None:
                h.setOptionValue("simplex_strategy", strategy)
            h.run()
            ms = h.getModelStatus()
        h.setOptionValue("simplex_strategy", 1)
        if ms == highspy.HighsModelStatus.kUnboundedOrInfeasible:
            return self._disambiguate()
        if ms not in _STATUS and (self.row_scale != 1.0).any() | (self.col_scale != 1.0).any():
            log.debug("HiGHS status %s; dropping external scaling", ms)
            self._unscale()
            h.run()
            ms = h.getModelStatus()
            if ms == highspy.HighsModelStatus.kUnboundedOrInfeasible:
                return self._disambiguate()
        if ms not in _STATUS:
            raise LpError(NUMERICAL, f"HiGHS ended with {ms}")
        return _STATUS[ms]

    def _unscale(self):
        """Reload the current model (bounds, costs, added rows) without external scaling."""
        cur = self.h.getLp()
        r, s = self.row_scale, self.col_scale
        A = sp.csc_matrix(
            (np.array(cur.a_matrix_.value_), np.array(cur.a_matrix_.index_), np.array(cur.a_matrix_.start_)),
            shape=(cur.num_row_, cur.num_col_),
        )
        A = sp.csc_matrix(sp.diags(1.0 / r) @ A @ sp.diags(1.0 / s))
        A.sort_indices()
        model = highspy.HighsLp()
        model.num_col_, model.num_row_ = cur.num_col_, cur.num_row_
        model.col_cost_ = np.array(cur.col_cost_) / s
        model.col_lower_ = np.array(cur.col_lower_) * s
        model.col_upper_ = np.array(cur.col_upper_) * s
        model.row_lower_ = np.array(cur.row_lower_) / r
        model.row_upper_ = np.array(cur.row_upper_) / r
        model.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        model.a_matrix_.start_ = A.indptr.astype(np.int32)
        model.a_matrix_.index_ = A.indices.astype(np.int32)
        model.a_matrix_.value_ = A.data
        model.offset_ = cur.offset_
        self.row_scale = np.ones(len(r))
        self.col_scale = np.ones(len(s))
        self.h.clearModel()
        self._configure()
        self.h.passModel(model)

    def _disambiguate(self) -> str:
        # feasibility probe with a zero objective separates infeasible from unbounded
        lp = self.h.getLp()
        probe = highspy.Highs()
        probe.setOptionValue("output_flag", False)
        probe.setOptionValue("presolve", "off")
        lp.col_cost_ = np.zeros(lp.num_col_)
        probe.passModel(lp)
        probe.run()
        return UNBOUNDED if probe.getModelStatus() == highspy.HighsModelStatus.kOptimal else INFEASIBLE


def solve_lp(lp: StandardFormLP, opts: SolverOptions | None = None) -> LpSolution:
    """Solve ``lp`` to a basic optimal solution with row duals and reduced costs."""
    opts = opts or SolverOptions()
    if opts.method == "reference":
        from lisa.simplex import solve_dense

        return solve_dense(lp, tol=opts.primal_tol, max_iter=opts.max_iter)
    return LpSession(lp, opts).solve()


def pin_rows(n_cols: int, pins: Sequence[tuple[int, float]]) -> sp.csc_matrix:
    cols = [j for j, _ in pins]
    return sp.csc_matrix((np.ones(len(pins)), (np.arange(len(pins)), cols)), shape=(len(pins), n_cols))


def solve_with_pins(
    lp: StandardFormLP, pins: Sequence[tuple[int, float]], opts: SolverOptions | None = None
) -> LpSolution:
    """Solve ``lp`` with extra equality rows ``x_j = value``.

    ``pin_duals`` holds the duals of the pin rows in pin order; ``duals``
    covers the original rows only. An infeasible result carries
    ``cause="pins"`` when the base LP is feasible and ``cause="base"`` otherwise.
    """
    for j, v in pins:
        if not lp.lb[j] - 1e-9 <= v <= lp.ub[j] + 1e-9:
            raise ValueError(f"pin value {v} for column {j} outside [{lp.lb[j]}, {lp.ub[j]}]")
    pinned = lp.append_rows(pin_rows(lp.n_cols, pins), [EQ] * len(pins), [v for _, v in pins])
    sol = solve_lp(pinned, opts)
    m = lp.n_rows
    sol.pin_duals = sol.duals[m:].copy()
    sol.duals = sol.duals[:m].copy()
    if sol.status == INFEASIBLE:
        base = solve_lp(lp, opts)
        sol.cause = "base" if base.status == INFEASIBLE else "pins"
    return sol


def kkt_residuals(lp: StandardFormLP, sol: LpSolution) -> dict[str, float]:
    """Scaled primal/dual feasibility and complementary slackness residuals."""
    x, y, d = sol.x, sol.duals, sol.reduced_costs
    ax = lp.A @ x
    scale_b = 1.0 + np.abs(lp.b)
    viol = np.where(lp.senses == EQ, np.abs(ax - lp.b), np.maximum(ax - lp.b, 0.0)) / scale_b
    bnd = np.maximum(np.maximum(lp.lb - x, 0.0), np.maximum(x - lp.ub, 0.0)) / (1.0 + np.abs(x))
    primal = float(max(viol.max(initial=0.0), bnd.max(initial=0.0)))
    # stationarity: c - A'y - d = 0 ; sign conditions on y (<= rows: y <= 0)
    stat = np.abs(lp.c - lp.A.T @ y - d) / (1.0 + np.abs(lp.c))
    ysign = np.where(lp.senses == LE, np.maximum(y, 0.0), 0.0)
    at_lb = np.isclose(x, lp.lb, atol=1e-7, rtol=1e-9)
    at_ub = np.isclose(x, lp.ub, atol=1e-7, rtol=1e-9)
    dsign = np.where(
        at_lb & ~at_ub,
        np.maximum(-d, 0.0),
        np.where(at_ub & ~at_lb, np.maximum(d, 0.0), np.where(~at_lb & ~at_ub, np.abs(d), 0.0)),
    ) / (1.0 + np.abs(lp.c))
    dual = float(max(stat.max(initial=0.0), ysign.max(initial=0.0), dsign.max(initial=0.0)))
    slack = np.where(lp.senses == LE, lp.b - ax, 0.0)
    comp = float((np.abs(slack * y) / (1.0 + np.abs(lp.b) * np.abs(y))).max(initial=0.0))
    return {"primal": primal, "dual": dual, "complementarity": comp}


def dual_objective(lp: StandardFormLP, sol: LpSolution) -> float:
    """``b'y + sum of bound terms``; equals the primal objective at optimality."""
    d = sol.reduced_costs
    bound_term = np.where(d > 0, np.where(np.isfinite(lp.lb), lp.lb, 0.0) * d, 0.0)
    bound_term += np.where(d < 0, np.where(np.isfinite(lp.ub), lp.ub, 0.0) * d, 0.0)
    return float(lp.b @ sol.duals + bound_term.sum() + lp.offset)
