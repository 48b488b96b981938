"""Technology learning curves and their piecewise-linear MILP encoding.

Specific cost falls with cumulative installed capacity ``P`` (GW):
``c(P) = c0 * (1 + P/P0) ** -r``. The cumulative investment cost is the
integral of that curve; it is concave, so inside a minimization it needs
an SOS2 / binary encoding rather than a plain LP.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from lisa.investment import ExtraBlock, LearningInfo, PathwayProblem, inv_weight
from lisa.lp import EQ, LE

P0_FLOOR = 0.1  # GW
BN = 1e9  # EUR per bn EUR


@dataclass(frozen=True)
class LearningCurve:
    c0: float  # EUR/kW at P = 0
    p0: float  # GW installed at the reference point
    r: float  # learning exponent, 0 <= r < 1
    p_max: float | None = None  # GW, upper end of the breakpoint range
    n_pw: int = 10

    def __post_init__(self):
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if not 0.0 < self.r < 1.0:
            raise ValueError("learning index must lie in (0, 1)")
        if self.p0 < 0:
            raise ValueError("P0 must be non-negative")
        if self.n_pw < 3:
            raise ValueError("need at least three breakpoints")
        if self.p_max is not None and self.p_max <= 0:
            raise ValueError("P_max must be positive")

    @property
    def p0_eff(self) -> float:
        return max(self.p0, P0_FLOOR)

    @property
    def learning_rate(self) -> float:
        """Cost reduction per doubling of capacity."""
        return 1.0 - 2.0 ** (-self.r)


def specific_cost(curve: LearningCurve, P) -> np.ndarray | float:
    """EUR/kW after ``P`` GW of cumulative additions."""
    P = np.asarray(P, dtype=float)
    out = curve.c0 * (1.0 + P / curve.p0_eff) ** (-curve.r)
    return float(out) if out.ndim == 0 else out


def cumulative_cost(curve: LearningCurve, P) -> np.ndarray | float:
    """bn EUR spent to add ``P`` GW; closed-form integral of :func:`specific_cost`."""
    P = np.asarray(P, dtype=float)
    p0, r = curve.p0_eff, curve.r
    out = curve.c0 * p0 / (1.0 - r) * ((1.0 + P / p0) ** (1.0 - r) - 1.0) / 1000.0
    return float(out) if out.ndim == 0 else out


def make_breakpoints(curve: LearningCurve, p_max: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Equidistant breakpoints ``y`` (GW) on ``[0, P_max]`` and curve values (bn EUR)."""
    p_max = curve.p_max if p_max is None else p_max
    if p_max is None or not np.isfinite(p_max) or p_max <= 0:
        raise ValueError("breakpoints need a finite positive P_max")
    y = np.linspace(0.0, p_max, curve.n_pw)
    return y, cumulative_cost(curve, y)


def interpolate(y: np.ndarray, values: np.ndarray, P) -> np.ndarray | float:
    """Piecewise-linear cost at ``P``; outside ``[y0, yN]`` is an error."""
    P = np.asarray(P, dtype=float)
    if np.any(P < y[0] - 1e-9) or np.any(P > y[-1] + 1e-9):
        raise ValueError("capacity outside the breakpoint range")
    out = np.interp(P, y, values)
    return float(out) if out.ndim == 0 else out


def _technology_lifetime(problem: PathwayProblem, tech: str, lifetimes: dict[str, float] | None) -> float | None:
    if lifetimes and tech in lifetimes:
        return lifetimes[tech]
    found = {zc.lifetime for zc in problem.z if zc.technology == tech and zc.lifetime is not None}
    if len(found) > 1:
        raise ValueError(f"{tech}: options disagree on the lifetime")
    return found.pop() if found else None


def _linear_optimum(problem: PathwayProblem, members: list[int]) -> float:
    """Total GW added over ``members`` in the linear-cost closed optimum (at least P0 floor)."""
    from lisa.pathway import solve_closed

    sol = solve_closed(problem)
    total = sum(sol.z[problem.z[j].option][problem.z[j].horizon] for j in members)
    return max(total / 1000.0, P0_FLOOR)


def encode_pw_blocks(
    problem: PathwayProblem,
    curves: dict[str, LearningCurve],
    weights: dict[str, list[float]] | None = None,
    lifetimes: dict[str, float] | None = None,
) -> PathwayProblem:
    """Replace the linear investment cost of learning technologies by a
    piecewise-linear cumulative cost curve.

    Per technology and horizon ``m`` the encoding adds weights ``gamma_m``
    (SOS2, sum 1) and segment binaries ``delta_m`` (sum 1, adjacency rows)
    with ``gamma_m' y`` equal to the cumulative additions up to ``m``. The
    objective gets ``(w_m - w_{m+1}) * c_pw(P_m)``, which telescopes to
    ``sum_m w_m (c_pw(P_m) - c_pw(P_{m-1}))``.

    Weights per horizon come from ``weights[tech]`` or are computed from the
    lifetime (``lifetimes[tech]`` or the options' own lifetime). Returns a
    new problem; the input is left unchanged.
    """
    if problem.ext is not None:
        raise ValueError("problem already carries an investment extension")
    M, n_z = problem.M, problem.n_z
    z_cols = list(problem.z)
    c_cols, lb, ub, names = [], [], [], []
    rows_i, rows_j, rows_v, b, senses, row_names = [], [], [], [], [], []
    binaries, sos2, infos = [], [], []

    def new_col(name, cost, hi):
        names.append(name)
        c_cols.append(cost)
        lb.append(0.0)
        ub.append(hi)
        return len(names) - 1

    def new_row(name, coefs, sense, rhs):
        i = len(b)
        for j, v in coefs:
            rows_i.append(i)
            rows_j.append(j)
            rows_v.append(v)
        b.append(rhs)
        senses.append(sense)
        row_names.append(name)

    for tech, curve in curves.items():
        members = [j for j, zc in enumerate(z_cols) if zc.technology == tech]
        if not members:
            raise ValueError(f"learning curve for {tech!r} matches no investment option")
        total = sum(z_cols[j].ub for j in members) / 1000.0
        p_max = curve.p_max
        if p_max is None:
            # unbounded additions: twice the linear-cost optimum; the link rows then cap them
            p_max = total if np.isfinite(total) else 2.0 * _linear_optimum(problem, members)
        elif np.isfinite(total) and p_max < total - 1e-9:
            raise ValueError(f"{tech}: P_max {p_max} GW below the reachable {total} GW")
        y, values = make_breakpoints(curve, p_max)
        if weights and tech in weights:
            w = list(weights[tech])
        else:
            life = _technology_lifetime(problem, tech, lifetimes)
            if life is None or problem.spec is None:
                raise ValueError(f"{tech}: need investment weights or a lifetime and pathway spec")
            w = [inv_weight(m, life, problem.spec) for m in range(M)]
        if len(w) != M:
            raise ValueError(f"{tech}: expected {M} weights")
        w_next = w[1:] + [0.0]
        n = curve.n_pw
        gam_all, del_all, zc_all = [], [], []
        prev_gamma: list[int] | None = None
        for m in range(M):
            coef = (w[m] - w_next[m]) * BN
            gam = [new_col(f"gamma[{tech},{m},{k}]", coef * values[k], 1.0) for k in range(n)]
            dl = [new_col(f"delta[{tech},{m},{k}]", 0.0, 1.0) for k in range(n - 1)]
            binaries += dl
            sos2.append(tuple(gam))
            new_row(f"conv[{tech},{m}]", [(n_z + j, 1.0) for j in gam], EQ, 1.0)
            new_row(f"seg[{tech},{m}]", [(n_z + j, 1.0) for j in dl], EQ, 1.0)
            for k in range(n):
                near = [dl[k - 1]] if k > 0 else []
                if k < n - 1:
                    near.append(dl[k])
                new_row(f"adj[{tech},{m},{k}]", [(n_z + gam[k], 1.0)] + [(n_z + d, -1.0) for d in near], LE, 0.0)
            zm = [j for j in members if z_cols[j].horizon == m]
            link = [(j, 1.0 / 1000.0) for j in zm] + [(n_z + j, -y[k]) for k, j in enumerate(gam)]
            if prev_gamma is not None:
                link += [(n_z + j, y[k]) for k, j in enumerate(prev_gamma)]
            new_row(f"link[{tech},{m}]", [(j, v) for j, v in link if v != 0.0], EQ, 0.0)
            prev_gamma = gam
            gam_all.append(tuple(gam))
            del_all.append(tuple(dl))
            zc_all.append(tuple(zm))
        for j in members:
            z_cols[j] = replace(z_cols[j], cost=0.0, learning=True)
        infos.append(LearningInfo(tech, y, values, tuple(w), tuple(gam_all), tuple(del_all), tuple(zc_all), curve))

    n_ext = len(names)
    A = sp.csr_matrix((rows_v, (rows_i, rows_j)), shape=(len(b), n_z + n_ext))
    ext = ExtraBlock(
        c=np.array(c_cols, dtype=float),
        lb=np.array(lb, dtype=float),
        ub=np.array(ub, dtype=float),
        names=tuple(names),
        A=A,
        b=np.array(b, dtype=float),
        senses=np.array(senses),
        row_names=tuple(row_names),
        binaries=tuple(binaries),
        sos2=tuple(sos2),
        learning=tuple(infos),
    )
    return replace(problem, z=tuple(z_cols), ext=ext)


def learning_costs(problem: PathwayProblem, inv_x: np.ndarray) -> dict[str, np.ndarray]:
    """Per technology, ``c_pw(P_m)`` in bn EUR for each horizon from an investment-side solution ``[z, ext]``."""
    out = {}
    if problem.ext is None:
        return out
    ext_x = inv_x[problem.n_z :]
    for info in problem.ext.learning:
        out[info.technology] = np.array([float(info.values @ ext_x[list(g)]) for g in info.gamma])
    return out


def learning_investment_cost(problem: PathwayProblem, inv_x: np.ndarray) -> np.ndarray:
    """EUR charged per horizon for learning technologies: ``w_m (c_pw(P_m) - c_pw(P_{m-1}))``."""
    total = np.zeros(problem.M)
    costs = learning_costs(problem, inv_x)
    for info in problem.ext.learning if problem.ext else ():
        cp = costs[info.technology]
        prev = np.concatenate([[0.0], cp[:-1]])
        total += np.asarray(info.weights) * (cp - prev) * BN
    return total


def encoding_at(problem: PathwayProblem, z: np.ndarray) -> np.ndarray:
    """Extension vector that realizes the piecewise cost exactly at ``z``.

    Per technology and horizon the cumulative additions are placed on their
    segment: two adjacent ``gamma`` weights and that segment's ``delta``.
    """
    ext = problem.ext
    out = np.zeros(problem.n_ext)
    if ext is None:
        return out
    z = np.asarray(z, dtype=float)
    for info in ext.learning:
        y = np.asarray(info.y)
        P = 0.0
        for gam, dl, cols in zip(info.gamma, info.delta, info.z_cols):
            P = min(max(P + z[list(cols)].sum() / 1000.0, y[0]), y[-1])
            k = min(int(np.searchsorted(y, P, side="right")) - 1, len(y) - 2)
            t = (P - y[k]) / (y[k + 1] - y[k])
            out[gam[k]] = 1.0 - t
            out[gam[k + 1]] = t
            out[dl[k]] = 1.0
    return out
