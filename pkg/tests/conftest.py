import itertools
from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest

from lisa.investment import linear_pathway
from lisa.learning import LearningCurve, encode_pw_blocks
from lisa.lp import OPTIMAL, LpBuilder, StandardFormLP, solve_lp
from lisa.model import DispatchConfig
from lisa.simplex import solve_dense
from lisa.scenario_io import micro_scenario


@lru_cache(maxsize=None)
def _micro(hours):
    return micro_scenario(hours)


@pytest.fixture(scope="session")
def micro():
    return _micro(24)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def enumerate_milp(p):
    """Brute-force optimum: every binary assignment times every SOS2 segment,
    each solved as an LP with the remaining columns fixed to zero."""
    lp = p.lp
    best = np.inf
    best_x = None
    seg_choices = [range(len(g) - 1) for g in p.sos2]
    for bits in itertools.product((0.0, 1.0), repeat=len(p.binaries)):
        for segs in itertools.product(*seg_choices):
            lb, ub = lp.lb.copy(), lp.ub.copy()
            for j, v in zip(p.binaries, bits):
                lb[j] = ub[j] = v
            for g, k in zip(p.sos2, segs):
                for i, j in enumerate(g):
                    if i not in (k, k + 1):
                        lb[j] = ub[j] = 0.0
            sol = solve_lp(lp.replace(lb=lb, ub=ub))
            if sol.status == OPTIMAL and sol.objective < best:
                best, best_x = sol.objective, sol.x
    return best, best_x


def random_lp(rng, m=30, n=50, density=0.3):
    """Feasible and bounded by construction: x0 satisfies the rows and all columns are boxed."""
    A = rng.normal(size=(m, n)) * (rng.random((m, n)) < density)
    x0 = rng.random(n)
    senses = np.where(rng.random(m) < 0.3, "E", "L")
    b = A @ x0 + np.where(senses == "L", rng.random(m), 0.0)
    return StandardFormLP(
        c=rng.normal(size=n),
        A=A,
        b=b,
        senses=senses,
        lb=np.zeros(n),
        ub=np.full(n, 2.0) + rng.random(n),
    )


def dispatch_residuals(s, cfg, d):
    """Worst violation of balance, storage, cyclicity, blending and CO2,
    recomputed from the named series and the scenario (not from LP rows)."""
    from collections import defaultdict

    from lisa.scenario import as_series

    N, dt = cfg.n_steps, cfg.step_hours
    sector = {n.id: n.sector for n in s.nodes}
    net = defaultdict(lambda: np.zeros(N))
    inj = defaultdict(lambda: np.zeros(N))
    h2in = defaultdict(lambda: np.zeros(N))
    co2 = 0.0
    out = {"balance": 0.0, "storage": 0.0, "cyclic": 0.0, "blend": 0.0, "co2": 0.0}
    for c in s.components:
        ser = d.series[c.id]
        if c.kind == "source":
            net[c.node] += ser["pg"]
            inj[c.node] += ser["pg"]
            co2 += c.co2 * ser["pg"].sum() * dt
        elif c.kind == "sink":
            net[c.node] -= ser["pd"]
        elif c.kind == "storage":
            net[c.node] += ser["pg"] - ser["pd"]
            e, xi = ser["e"], as_series(c.xi, N)
            # the last update wraps to step 0
            upd = np.roll(e, -1) - e + ser["pg"] / c.eta_g * dt - c.eta_d * ser["pd"] * dt - xi
            out["storage"] = max(out["storage"], float(np.abs(upd).max()))
            out["cyclic"] = max(out["cyclic"], abs(float(e[-1] - e[0])))
        else:
            net[c.from_node] -= ser["pd"]
            net[c.to_node] += ser["pg"]
            if sector[c.from_node] == "hydrogen":
                h2in[c.to_node] += ser["pg"]
            else:
                inj[c.to_node] += ser["pg"]
    for l in s.links:
        net[l.from_node] -= d.series[l.id]["pt"]
        net[l.to_node] += d.series[l.id]["pt"]
    out["balance"] = max(float(np.abs(v).max()) for v in net.values())
    if cfg.blending and cfg.h2_blend < 1.0:
        keys = [n for n, sec in sector.items() if sec == "methane"]
        if cfg.blend_scope == "node":
            pairs = [(h2in[n], inj[n]) for n in keys]
        else:
            pairs = [(sum(h2in[n] for n in keys), sum(inj[n] for n in keys))]
        for h, g in pairs:
            out["blend"] = max(out["blend"], float(np.max(h - cfg.h2_blend * g, initial=0.0)))
    if cfg.co2_budget is not None:
        out["co2"] = max(0.0, co2 - cfg.co2_budget)
    return out


def random_pathway(rng, learning=False):
    """Small forward-coupled pathway: per horizon two steps of demand served by
    two capped generators, a slack, and up to three investment columns."""
    M = 2 if learning else int(rng.integers(1, 4))
    S = 1000.0 if learning else 1.0  # learning curves work in GW, so size capacities in GW
    n_z = int(rng.integers(1, 4))
    horizon = sorted(int(h) for h in rng.integers(0, M, n_z))
    blocks = []
    for m in range(M):
        b = LpBuilder()
        rows = []
        for k in range(2):
            g1 = b.add_col(f"g1_{k}", rng.uniform(1, 10), 0.0, S * rng.uniform(0, 5))
            g2 = b.add_col(f"g2_{k}", rng.uniform(10, 30), 0.0, S * rng.uniform(0, 5))
            sl = b.add_col(f"slack_{k}", 1000.0)
            rows.append(b.add_row(f"d{k}", [(g1, -1.0), (g2, -1.0), (sl, -1.0)], "L", -S * rng.uniform(2, 12)))
        G = np.zeros((2, n_z))
        for j in range(n_z):
            if horizon[j] <= m:
                G[:, j] = -rng.uniform(0.2, 1.0, 2)
        blocks.append((b.build(), G, float(rng.uniform(0.5, 3.0))))
    p = linear_pathway(blocks, rng.uniform(0.5, 40.0, n_z).tolist(), (S * rng.uniform(1, 15, n_z)).tolist(), horizon)
    if learning:
        p = replace(p, z=tuple(replace(zc, technology="tech", inv_weight=1.0) for zc in p.z))
        curve = LearningCurve(rng.uniform(0.005, 0.06), rng.uniform(0.1, 3.0), rng.uniform(0.1, 0.5), n_pw=3)
        p = encode_pw_blocks(p, {"tech": curve}, weights={"tech": [1.0, 0.5]})
    return p


def oracle(p):
    """Closed optimum by an independent route: dense simplex or enumeration."""
    closed = p.closed_problem()
    if p.is_mip:
        best, x = enumerate_milp(closed)
    else:
        sol = solve_dense(closed.lp)
        best, x = sol.objective, sol.x
    n_x = p.block_offsets()[-1]
    z = x[n_x : n_x + p.n_z]
    inv_cost = float(closed.lp.c[n_x:] @ x[n_x:])
    return best, z, best - inv_cost


def draw(rng, base):
    """Random perturbation of the micro scenario: budget, blend limit, scope, demand and prices."""
    year = int(rng.choice(base.pathway.years))
    s = base.for_year(year)
    scale = rng.uniform(0.6, 1.3)
    comps = []
    for c in s.components:
        if c.kind == "sink" and c.id.startswith("demand"):
            c = replace(c, lower=np.asarray(c.lower) * scale, upper=np.asarray(c.upper) * scale)
        elif c.kind == "source" and 0 < c.cost < 1000:
            c = replace(c, cost=c.cost * rng.uniform(0.5, 1.5))
        elif c.kind == "storage":
            c = replace(c, e_set=c.e_max * rng.uniform(0, 1))
        comps.append(c)
    s = replace(
        s,
        components=tuple(comps),
        h2_blend=float(rng.uniform(0.0, 0.3)),
        blend_scope=str(rng.choice(["node", "system"])),
    )
    cfg = DispatchConfig.from_scenario(s)
    budget = cfg.co2_budget if cfg.co2_budget else 1e5
    return s, replace(cfg, co2_budget=budget * rng.uniform(0.2, 1.0))
