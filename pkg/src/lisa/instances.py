"""Small MILP instances shipped with the package.

All are small enough for exhaustive enumeration (at most 12 binaries, at
most 3 SOS2 groups of at most 6 points), which is how the branch-and-bound
is cross-checked.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from lisa.investment import linear_pathway
from lisa.learning import LearningCurve, encode_pw_blocks
from lisa.lp import EQ, LE, LpBuilder
from lisa.milp import MilpProblem

SEED = 7


def knapsack(n: int, seed: int = SEED) -> MilpProblem:
    """Maximize value under one weight limit, as a minimization."""
    rng = np.random.default_rng(seed + n)
    w = rng.integers(3, 20, n).astype(float)
    v = rng.integers(5, 30, n).astype(float)
    b = LpBuilder()
    cols = [b.add_col(f"x{i}", -v[i], 0.0, 1.0) for i in range(n)]
    b.add_row("weight", list(zip(cols, w)), LE, float(np.floor(w.sum() / 2)))
    return MilpProblem(b.build(), tuple(cols))


def facility(n_fac: int = 3, n_cust: int = 4, seed: int = SEED) -> MilpProblem:
    """Open facilities (binary, fixed cost) and ship continuous demand."""
    rng = np.random.default_rng(seed + 100)
    fixed = rng.integers(20, 60, n_fac).astype(float)
    cap = rng.integers(8, 15, n_fac).astype(float)
    dem = rng.integers(2, 6, n_cust).astype(float)
    ship = rng.uniform(1.0, 6.0, (n_fac, n_cust))
    b = LpBuilder()
    y = [b.add_col(f"open{i}", fixed[i], 0.0, 1.0) for i in range(n_fac)]
    x = [[b.add_col(f"ship{i}_{j}", ship[i, j]) for j in range(n_cust)] for i in range(n_fac)]
    for j in range(n_cust):
        b.add_row(f"dem{j}", [(x[i][j], 1.0) for i in range(n_fac)], EQ, dem[j])
    for i in range(n_fac):
        b.add_row(f"cap{i}", [(x[i][j], 1.0) for j in range(n_cust)] + [(y[i], -cap[i])], LE, 0.0)
    return MilpProblem(b.build(), tuple(y))


def pw_single(P: float = 25.0) -> MilpProblem:
    """One SOS2 group over a concave curve with P forced; the chord value is the answer."""
    y = np.array([0.0, 50.0, 100.0, 150.0])
    val = np.array([0.0, 60.0, 100.0, 120.0])
    b = LpBuilder()
    g = [b.add_col(f"g{k}", val[k], 0.0, 1.0) for k in range(len(y))]
    b.add_row("conv", [(j, 1.0) for j in g], EQ, 1.0)
    b.add_row("level", [(j, y[k]) for k, j in enumerate(g)], EQ, P)
    return MilpProblem(b.build(), sos2=(tuple(g),))


def pw_three(seed: int = SEED) -> MilpProblem:
    """Three concave cost curves (SOS2, 6 points each) sharing one demand."""
    rng = np.random.default_rng(seed + 200)
    b = LpBuilder()
    groups, level_terms = [], []
    for t in range(3):
        y = np.linspace(0.0, 10.0, 6)
        curve = LearningCurve(rng.uniform(50, 100), rng.uniform(1, 5), rng.uniform(0.1, 0.5), n_pw=6)
        c0 = float(curve.c0 * curve.p0_eff / (1 - curve.r))
        val = c0 * ((1 + y / curve.p0_eff) ** (1 - curve.r) - 1)
        g = [b.add_col(f"g{t}_{k}", val[k], 0.0, 1.0) for k in range(6)]
        b.add_row(f"conv{t}", [(j, 1.0) for j in g], EQ, 1.0)
        groups.append(tuple(g))
        level_terms += [(j, y[k]) for k, j in enumerate(g)]
    b.add_row("demand", [(j, -v) for j, v in level_terms], LE, -14.0)
    return MilpProblem(b.build(), sos2=tuple(groups))


def learning_toy(n_pw: int = 4) -> MilpProblem:
    """Two-horizon pathway with one learning technology serving a growing demand."""
    blocks = []
    for m, d in enumerate((3.0, 6.0)):
        b = LpBuilder()
        x = b.add_col("fuel", 40.0)
        b.add_row("demand", [(x, -1.0)], LE, -d * 1000.0)
        # investment relaxes the demand row: G = -1 in MW
        blocks.append((b.build(), np.array([[-1.0, -1.0]]) if m else np.array([[-1.0, 0.0]]), 1000.0))
    p = linear_pathway(blocks, [0.0, 0.0], [5000.0, 5000.0], horizon=[0, 1])
    p = replace(p, z=tuple(replace(zc, technology="tech") for zc in p.z))
    curve = LearningCurve(30.0, 2.0, 0.3, n_pw=n_pw)
    return encode_pw_blocks(p, {"tech": curve}, weights={"tech": [1.0, 0.6]}).closed_problem()


def micro_instances() -> dict[str, MilpProblem]:
    return {
        "knapsack6": knapsack(6),
        "knapsack12": knapsack(12),
        "facility": facility(),
        "pw_single": pw_single(),
        "pw_three": pw_three(),
        "learning_toy": learning_toy(),
    }
