"""Dense two-phase revised simplex with Bland's rule.

Small and slow on purpose: it shares no code with the HiGHS path and serves
as the reference solver for cross-checks on small problems.
"""

from __future__ import annotations

import numpy as np

from lisa.lp import (
    EQ,
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    LpSolution,
    StandardFormLP,
)


def _to_equality_form(lp: StandardFormLP):
    """Rewrite as ``min q u  s.t.  M u = h, u >= 0`` and return the back-map."""
    A = lp.A.toarray()
    m, n = A.shape
    cols = []  # (orig column, sign) per u-column, or (None, 0) for slacks
    shift = np.zeros(n)
    flip = np.ones(n)
    extra_rows = []
    for j in range(n):
        lo, hi = lp.lb[j], lp.ub[j]
        if np.isfinite(lo):
            shift[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            flip[j] = -1.0
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    n_le = int(np.sum(lp.senses != EQ))
    n_u = len(cols) + n_le + len(extra_rows)
    rows = m + len(extra_rows)
    M = np.zeros((rows, n_u))
    q = np.zeros(n_u)
    for k, (j, sgn) in enumerate(cols):
        M[:m, k] = A[:, j] * sgn
        q[k] = lp.c[j] * sgn
    h = np.empty(rows)
    h[:m] = lp.b - A @ shift
    k = len(cols)
    for i in range(m):
        if lp.senses[i] != EQ:
            M[i, k] = 1.0
            k += 1
    for r, (uc, cap) in enumerate(extra_rows):
        M[m + r, uc] = 1.0
        M[m + r, k] = 1.0
        h[m + r] = cap
        k += 1
    sign = np.where(h < 0, -1.0, 1.0)
    M *= sign[:, None]
    h *= sign
    return M, h, q, cols, shift, sign


def _simplex(M, h, q, basis, allowed, tol, max_iter):
    """Bland's-rule revised simplex from a feasible basis. Returns (status, basis, iters)."""
    rows, n = M.shape
    it = 0
    while True:
        if it >= max_iter:
            return ITERATION_LIMIT, basis, it
        B = M[:, basis]
        y = np.linalg.solve(B.T, q[basis])
        d = q - M.T @ y
        in_basis = np.zeros(n, dtype=bool)
        in_basis[basis] = True
        cand = np.flatnonzero(allowed & ~in_basis & (d < -tol))
        if len(cand) == 0:
            return OPTIMAL, basis, it
        e = int(cand[0])
        dirn = np.linalg.solve(B, M[:, e])
        xb = np.linalg.solve(B, h)
        pos = dirn > tol
        if not np.any(pos):
            return UNBOUNDED, basis, it
        ratios = np.full(rows, np.inf)
        ratios[pos] = np.maximum(xb[pos], 0.0) / dirn[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * (1.0 + abs(best)))
        leave = min(ties, key=lambda r: basis[r])
        basis = basis.copy()
        basis[leave] = e
        it += 1


def solve_dense(lp: StandardFormLP, tol: float = 1e-9, max_iter: int | None = None) -> LpSolution:
    M, h, q, cols, shift, sign = _to_equality_form(lp)
    rows, n_u = M.shape
    max_iter = max_iter or 50 * (rows + n_u + 10)
    # phase I with one artificial per row
    Ma = np.hstack([M, np.eye(rows)])
    qa = np.concatenate([np.zeros(n_u), np.ones(rows)])
    basis = np.arange(n_u, n_u + rows)
    allowed = np.ones(n_u + rows, dtype=bool)
    status, basis, it1 = _simplex(Ma, h, qa, basis, allowed, tol, max_iter)
    xb = np.linalg.solve(Ma[:, basis], h)
    n = lp.n_cols
    empty = LpSolution(status, np.zeros(n), np.nan, np.zeros(lp.n_rows), np.zeros(n), iterations=it1)
    if status == ITERATION_LIMIT:
        return empty
    if qa[basis] @ xb > tol * max(1.0, np.abs(h).max(initial=0.0)) * 10:
        empty.status = INFEASIBLE
        return empty
    # drive zero-level artificials out of the basis; drop redundant rows
    keep = np.ones(rows, dtype=bool)
    for r in range(rows):
        if basis[r] < n_u:
            continue
        Binv_row = np.linalg.solve(Ma[:, basis].T, np.eye(rows)[r])
        alpha = Binv_row @ M
        alpha[np.isin(np.arange(n_u), basis)] = 0.0
        cand = np.flatnonzero(np.abs(alpha) > 1e-9)
        if len(cand):
            basis[r] = int(cand[0])
        else:
            keep[r] = False
    M2, h2 = M[keep], h[keep]
    basis2 = basis[keep]
    allowed2 = np.ones(n_u, dtype=bool)
    status, basis2, it2 = _simplex(M2, h2, q, basis2, allowed2, tol, max_iter - it1)
    it = it1 + it2
    u = np.zeros(n_u)
    u[basis2] = np.linalg.solve(M2[:, basis2], h2)
    x = shift.copy()
    for k, (j, sgn) in enumerate(cols):
        x[j] += sgn * u[k]
    if status != OPTIMAL:
        return LpSolution(status, x, np.nan, np.zeros(lp.n_rows), np.zeros(n), iterations=it)
    y_std = np.zeros(rows)
    y_std[keep] = np.linalg.solve(M2[:, basis2].T, q[basis2])
    y = (y_std * sign)[: lp.n_rows]
    rc = lp.c - lp.A.T @ y
    return LpSolution(
        status=OPTIMAL,
        x=x,
        objective=float(lp.c @ x + lp.offset),
        duals=y,
        reduced_costs=np.asarray(rc).ravel(),
        iterations=it,
    )
