import itertools
from dataclasses import replace

import numpy as np
import pytest

from lisa.investment import (
    MW_PER_KW,
    PathwaySpec,
    build_eacp,
    build_pathway_problem,
    discount_sum,
    disp_weight,
    inv_weight,
)
from lisa.lp import solve_lp
from lisa.model import DispatchConfig, build_dispatch_lp
from lisa.pathway import solve_closed
from lisa.scenario import Component, InvestmentOption, Node, Scenario, as_series


def spec(years=(2030, 2040, 2050), terminal=2060, wacc=0.07, base=2030):
    return PathwaySpec(base, tuple(years), terminal, wacc)


def test_disp_weight_example():
    w = disp_weight(0, spec((2030, 2040)))
    # ten yearly terms, each discounted at the end of its year
    oracle = sum(1.07 ** -(t - 2030 + 1) for t in range(2030, 2040))
    assert w == pytest.approx(7.02358, abs=1e-5)
    assert w == pytest.approx(oracle, abs=1e-12)


def test_disp_weight_undiscounted_and_single_year():
    assert disp_weight(1, spec(wacc=0.0)) == 10.0
    assert disp_weight(0, spec((2030,), 2031, wacc=0.0)) == 1.0
    # one discounted year carries end-of-year discounting
    assert disp_weight(0, spec((2030,), 2031)) == pytest.approx(1 / 1.07, rel=1e-14)


@pytest.mark.parametrize("w", np.round(np.arange(0.01, 0.151, 0.01), 2))
def test_closed_form_equals_summation(w):
    for span in range(1, 31):
        s = spec((2030, 2030 + span), 2030 + span + 5, w)
        for m in range(2):
            closed = disp_weight(m, s)
            direct = sum((1 + w) ** -(t - 2030 + 1) for t in range(s.year(m), s.year(m + 1)))
            assert discount_sum(s.year(m), s.year(m + 1), 2030, w) == pytest.approx(direct, rel=1e-15)
            assert abs(closed - direct) <= 1e-9


def test_inv_weight_examples():
    s = spec()
    assert inv_weight(0, 15.0, s) == pytest.approx(2.0, abs=1e-12)
    assert inv_weight(2, 15.0, s) == pytest.approx(0.17228, abs=1e-5)
    assert inv_weight(2, 15.0, s) == pytest.approx(1.07**-20 * 10 / 15, rel=1e-12)
    assert inv_weight(1, 20.0, spec(wacc=0.0)) == 1.0
    assert inv_weight(3, 15.0, s) == 0.0


def test_spec_validation():
    with pytest.raises(ValueError):
        spec((2040, 2030))
    with pytest.raises(ValueError):
        spec(wacc=-1.0)
    with pytest.raises(ValueError):
        spec(())


def capped_system(n=2, effect=1.0, z_max=np.inf):
    nodes = (Node("el", "electricity"),)
    comps = (
        Component("new", "source", "el", upper=0.0),
        Component("dear", "source", "el", upper=100.0, cost=100.0),
        Component("load", "sink", "el", lower=3.0, upper=3.0),
    )
    opt = InvestmentOption("build", "tech", ("new",), {}, 1.0, effect=effect, z_max=z_max)
    return Scenario("capped", n, 1.0, nodes, comps, options=(opt,)), opt


def test_eacp_invests_to_serve_load():
    s, opt = capped_system()
    cfg = DispatchConfig(2)
    lp, vmap = build_eacp(s, cfg, [opt], annual_cost={"build": 1.0})
    sol = solve_lp(lp)
    z = sol.x[vmap.col_index[("z", "build", 0)]]
    assert z == pytest.approx(3.0)
    # cost: 1 EUR/kW/a for 2 of 8760 hours
    assert sol.objective == pytest.approx(3.0 * MW_PER_KW * 2 / 8760)


def test_eacp_profile_effect_relaxes_rows():
    s, opt = capped_system(n=3, effect=np.array([1.0, 0.5, 0.0]))
    lp, vmap = build_eacp(s, DispatchConfig(3), [opt], annual_cost={"build": 1.0})
    jz = vmap.col_index[("z", "build", 0)]
    col = lp.A[:, jz].toarray().ravel()
    assert col[vmap.row("cap", "new", 0)] == -1.0
    assert col[vmap.row("cap", "new", 1)] == -0.5
    assert ("cap", "new", 2) not in vmap.row_index or col[vmap.row("cap", "new", 2)] == 0.0


def test_eacp_prices_against_capacity_dual():
    s, opt = capped_system()
    s = replace(s, components=(replace(s.components[0], upper=2.0),) + s.components[1:])
    cfg = DispatchConfig(2)
    lp, vmap = build_dispatch_lp(s, cfg, {"new"})
    base = solve_lp(lp)
    value = -sum(base.duals[vmap.row("cap", "new", k)] for k in range(2))  # EUR per MW over the horizon
    assert value == pytest.approx(2 * (100.0 - 0.0))
    per_kw = lambda horizon_cost: horizon_cost * 8760 / (2 * MW_PER_KW)  # noqa: E731
    for price, expect in ((1.1 * value, 0.0), (0.9 * value, 1.0)):
        lp2, vmap2 = build_eacp(s, cfg, [opt], annual_cost={"build": per_kw(price)})
        z = solve_lp(lp2).x[vmap2.col_index[("z", "build", 0)]]
        assert z == pytest.approx(expect, abs=1e-9)


def test_eacp_unknown_target():
    s, _ = capped_system()
    bad = InvestmentOption("x", "tech", ("nope",), {}, 1.0)
    with pytest.raises(ValueError):
        build_eacp(s, DispatchConfig(2), [bad])


def test_eacp_dominates_dispatch(micro):
    s = micro.for_year(2040)
    cfg = DispatchConfig.from_scenario(s)
    with_opts = solve_lp(build_eacp(s, cfg, year=2040)[0]).objective
    frozen = [replace(o, z_max=0.0) for o in s.options]
    without = solve_lp(build_eacp(s, cfg, frozen, year=2040)[0]).objective
    assert with_opts <= without + 1e-6
    assert without == pytest.approx(solve_lp(build_dispatch_lp(s, cfg)[0]).objective, rel=1e-9)


def test_single_horizon_matches_eacp(micro):
    sp_ = PathwaySpec.from_scenario(micro)
    one = PathwaySpec(2030, (2030,), 2060, 0.07, sp_.configs[:1])
    opts = list(micro.options[:4])
    p = build_pathway_problem(one, micro, opts).closed_problem().lp
    e, vmap = build_eacp(micro.for_year(2030), one.configs[0], opts, year=2030)
    n_x = len(vmap.columns) - len(opts)
    assert (p.A != e.A).nnz == 0
    assert np.array_equal(p.b, e.b) and np.array_equal(p.senses, e.senses)
    assert np.array_equal(p.lb, e.lb) and np.array_equal(p.ub, e.ub)
    weight = disp_weight(0, one) * one.configs[0].annual_factor
    assert np.allclose(p.c[:n_x], weight * e.c[:n_x], rtol=1e-12)


def test_coupling_is_lower_triangular(micro):
    p = build_pathway_problem(PathwaySpec.from_scenario(micro), micro, list(micro.options[:3]))
    for m, blk in enumerate(p.blocks):
        used = np.flatnonzero(np.abs(blk.G).sum(axis=0).A1)
        horizons = {p.z[j].horizon for j in used}
        assert horizons <= set(range(m + 1))
        for zc_idx, zc in enumerate(p.z):
            if zc.horizon <= m:
                assert zc_idx in used


def test_investment_persists_forward(micro):
    p = build_pathway_problem(PathwaySpec.from_scenario(micro), micro, [micro.option("onshore_north_new")])
    sol = solve_closed(p)
    closed = p.closed_problem().lp
    x = solve_lp(closed).x.copy()
    n_x = p.block_offsets()[-1]
    x[n_x] += 500.0  # more horizon-1 capacity
    r = closed.A @ x - closed.b
    le = closed.senses == "L"
    assert r[le].max() <= 1e-6
    assert sol.objective == pytest.approx(solve_lp(closed).objective)


def raised(s, option, P):
    comps = []
    for c in s.components:
        if c.id in option.targets:
            c = replace(c, upper=as_series(c.upper, s.n_steps) + as_series(option.effect, s.n_steps) * P)
        comps.append(c)
    return replace(s, components=tuple(comps))


def test_closed_matches_grid_search(micro):
    opt = replace(micro.option("onshore_north_new"), z_max=6000.0)
    sc = replace(micro, options=(opt,))
    ps = PathwaySpec.from_scenario(sc)
    closed = solve_closed(build_pathway_problem(ps, sc))
    h = 500.0
    levels = np.arange(0, 3 * 6000.0 + h / 2, h)
    # dispatch cost of each horizon as a function of cumulative capacity
    op = np.zeros((ps.M, len(levels)))
    for m, year in enumerate(ps.years):
        base = sc.for_year(year)
        weight = disp_weight(m, ps) * ps.configs[m].annual_factor
        for i, P in enumerate(levels):
            op[m, i] = weight * solve_lp(build_dispatch_lp(raised(base, opt, P), ps.configs[m])[0]).objective
    price = [inv_weight(m, opt, ps) * opt.capex[y] * MW_PER_KW for m, y in enumerate(ps.years)]
    K = int(6000 / h)
    best = np.inf
    grid = {}
    for k in itertools.product(range(K + 1), repeat=ps.M):
        cum = np.cumsum(k)
        f = sum(op[m, cum[m]] + price[m] * k[m] * h for m in range(ps.M))
        grid[k] = f
        if f < best:
            best = f
    assert closed.objective <= best + 1e-9 * abs(best)
    # convexity: the nearest lattice point is within slope x distance of the optimum
    z = closed.z[opt.id]
    near = tuple(int(v) for v in np.clip(np.round(z / h), 0, K))
    slope = max(abs(grid[a] - grid[b]) / h for a in grid for b in [tuple(a[:i]) + (a[i] + 1,) + tuple(a[i + 1 :]) for i in range(ps.M)] if b in grid)
    assert best - closed.objective <= slope * np.abs(np.array(near) * h - z).sum() + 1e-9 * abs(best)
    assert grid[near] >= best
