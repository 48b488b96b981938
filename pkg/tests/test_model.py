from dataclasses import replace

import numpy as np
import pytest

from conftest import dispatch_residuals, draw
from lisa.lp import OPTIMAL, solve_lp
from lisa.model import DispatchConfig, SolveError, build_dispatch_lp, extract_dispatch_solution, flow_summary
from lisa.scenario import Component, Link, Node, Scenario, validate_scenario
from lisa.scenario_io import micro_scenario


def tiny(components, nodes=None, links=(), n=2, **kw):
    nodes = nodes or (Node("el", "electricity"),)
    return Scenario("tiny", n, 1.0, tuple(nodes), tuple(components), tuple(links), **kw)


def solve(s, cfg=None):
    cfg = cfg or DispatchConfig.from_scenario(s)
    lp, vmap = build_dispatch_lp(s, cfg)
    sol = solve_lp(lp)
    return lp, vmap, sol, extract_dispatch_solution(sol, vmap, lp)


def test_one_node_example():
    s = tiny([Component("src", "source", "el", upper=5.0, cost=10.0), Component("load", "sink", "el", lower=3.0, upper=3.0)])
    _, _, sol, d = solve(s)
    assert sol.objective == pytest.approx(60.0)
    assert d.get("src", "pg") == pytest.approx([3.0, 3.0])


def test_step_length_scales_cost():
    s = tiny([Component("src", "source", "el", upper=5.0, cost=10.0), Component("load", "sink", "el", lower=3.0, upper=3.0)])
    s = replace(s, step_hours=0.25)
    assert solve(s)[2].objective == pytest.approx(15.0)


def test_converter_coupling():
    nodes = (Node("el", "electricity"), Node("h2", "hydrogen"))
    comps = [
        Component("grid", "source", "el", lower=1.0, upper=1.0),
        Component("ely", "converter", from_node="el", to_node="h2", efficiency=0.7),
        Component("h2load", "sink", "h2", upper=10.0, cost=-1.0),
    ]
    d = solve(tiny(comps, nodes))[3]
    assert d.get("ely", "pd") == pytest.approx([1.0, 1.0])
    assert d.get("ely", "pg") == pytest.approx([0.7, 0.7])


def test_co2_row_binding():
    comps = [
        Component("fossil", "source", "el", upper=100.0, cost=1.0, co2=0.4),
        Component("clean", "source", "el", upper=100.0, cost=50.0),
        Component("load", "sink", "el", lower=100.0, upper=100.0),
    ]
    s = tiny(comps, n=2)
    cfg = DispatchConfig(2, co2_budget=40.0)
    lp, vmap, sol, d = solve(s, cfg)
    assert d.get("fossil", "pg").sum() == pytest.approx(100.0)
    assert d.co2_emissions == pytest.approx(40.0)
    assert d.co2_price == pytest.approx((50.0 - 1.0) / 0.4)
    # slack budget: no carbon price
    d2 = solve(s, DispatchConfig(2, co2_budget=1000.0))[3]
    assert d2.co2_price == 0.0


def test_profile_length_mismatch_rejected():
    s = tiny([Component("src", "source", "el", upper=np.ones(2))], n=2)
    with pytest.raises(ValueError):
        build_dispatch_lp(s, DispatchConfig(3))


def test_validation_reports():
    assert validate_scenario(micro_scenario(24)).ok
    nodes = (Node("el", "electricity"), Node("h2", "hydrogen"))
    bad_eff = tiny([Component("ely", "converter", from_node="el", to_node="h2", efficiency=1.3)], nodes, n=3)
    rep = validate_scenario(bad_eff)
    assert len(rep) == 1 and "ely" in rep[0].path
    short = tiny([Component("pv", "source", "el", upper=np.ones(2))], n=3)
    rep = validate_scenario(short)
    assert len(rep) == 1 and "pv/upper" in rep[0].path
    dangling = tiny([Component("x", "sink", "nowhere")])
    assert "dangling" in str(validate_scenario(dangling))
    loop = tiny([], links=[Link("l", "electricity", "el", "el", 1.0)])
    assert "self-loop" in str(validate_scenario(loop))


def test_config_rejects_short_horizon():
    with pytest.raises(ValueError):
        DispatchConfig(1)
    with pytest.raises(ValueError):
        DispatchConfig(4, h2_blend=1.5)


def test_storage_shifts_energy_cyclically():
    comps = [
        Component("cheap", "source", "el", upper=np.array([10.0, 0.0, 0.0]), cost=1.0),
        Component("dear", "source", "el", upper=10.0, cost=100.0),
        Component("load", "sink", "el", lower=2.0, upper=2.0),
        Component("bat", "storage", "el", e_max=20.0, eta_g=0.9, eta_d=0.9, p_g_max=5.0, p_d_max=5.0, e_set=0.0),
    ]
    s = tiny(comps, n=3)
    cfg = DispatchConfig(3)
    d = solve(s, cfg)[3]
    e = d.get("bat", "e")
    assert e[-1] == pytest.approx(e[0], abs=1e-6)
    res = dispatch_residuals(s, cfg, d)
    assert max(res.values()) <= 1e-6
    assert d.get("dear", "pg").sum() < 6.0  # some load was served from storage


def test_extraction_shapes_and_status(micro):
    s, cfg = micro.for_year(2030), None
    cfg = DispatchConfig.from_scenario(s)
    lp, vmap = build_dispatch_lp(s, cfg)
    sol = solve_lp(lp)
    d = extract_dispatch_solution(sol, vmap, lp)
    for owner, roles in d.series.items():
        for arr in roles.values():
            assert arr.shape == (cfg.n_steps,)
    for c in s.components:
        if c.kind == "storage":
            e = d.get(c.id, "e")
            assert abs(e[-1] - e[0]) <= 1e-6
    failed = replace(sol, status="infeasible")
    with pytest.raises(SolveError):
        extract_dispatch_solution(failed, vmap, lp)


def test_objective_split_sums_to_total(micro):
    s = micro.for_year(2040)
    d = solve(s)[3]
    assert sum(d.objective_by_sector.values()) == pytest.approx(d.objective, rel=1e-9)


def test_invariants_over_random_draws(micro):
    rng = np.random.default_rng(2024)
    for _ in range(20):
        s, cfg = draw(rng, micro)
        lp, vmap = build_dispatch_lp(s, cfg)
        sol = solve_lp(lp)
        assert sol.status == OPTIMAL
        res = dispatch_residuals(s, cfg, extract_dispatch_solution(sol, vmap, lp))
        for name, v in res.items():
            assert v <= 1e-6, (name, v)


def test_tighter_budget_never_cheaper(micro):
    s = micro.for_year(2040)
    cfg = DispatchConfig.from_scenario(s)
    objs = []
    for frac in (1.0, 0.5, 0.1):
        lp, _ = build_dispatch_lp(s, replace(cfg, co2_budget=cfg.co2_budget * frac))
        objs.append(solve_lp(lp).objective)
    assert objs[0] <= objs[1] + 1e-6 and objs[1] <= objs[2] + 1e-6


def test_flow_summary_single_converter():
    nodes = (Node("el", "electricity"), Node("h2", "hydrogen"))
    comps = [
        Component("grid", "source", "el", lower=5.0, upper=5.0),
        Component("ely", "converter", from_node="el", to_node="h2", efficiency=0.7),
        Component("h2load", "sink", "h2", upper=10.0),
    ]
    d = solve(tiny(comps, nodes))[3]
    rows = {(r.kind, r.name): r for r in flow_summary(d)}
    conv = rows[("converter", "ely")]
    assert (conv.energy_in, conv.energy_out) == pytest.approx((10.0, 7.0))
    pair = rows[("sector_pair", "electricity->hydrogen")]
    assert (pair.from_sector, pair.to_sector) == ("electricity", "hydrogen")
    annual = {(r.kind, r.name): r for r in flow_summary(d, annualize=True)}
    assert annual[("converter", "ely")].energy_in == pytest.approx(10.0 * 8760 / 2)


def test_flow_summary_zero_dispatch():
    nodes = (Node("el", "electricity"), Node("h2", "hydrogen"))
    comps = [
        Component("grid", "source", "el", upper=5.0, cost=1.0),
        Component("ely", "converter", from_node="el", to_node="h2", efficiency=0.7),
    ]
    d = solve(tiny(comps, nodes))[3]
    assert all(r.energy_in == 0.0 and r.energy_out == 0.0 for r in flow_summary(d))


def test_flow_summary_matches_series_sums(micro):
    s = micro.for_year(2030)
    d = solve(s)[3]
    rows = {(r.kind, r.name): r for r in flow_summary(d)}
    for c in s.components:
        if c.kind == "converter":
            r = rows[("converter", c.id)]
            assert r.energy_in == pytest.approx(float(np.sum(d.get(c.id, "pd"))), abs=1e-9)
            assert r.energy_out == pytest.approx(float(np.sum(d.get(c.id, "pg"))), abs=1e-9)


@pytest.mark.parametrize("scope", ["node", "system"])
def test_blending_limit_binds(scope):
    nodes = (Node("h2", "hydrogen"), Node("ch4", "methane"))
    comps = [
        Component("h2src", "source", "h2", upper=100.0, cost=1.0),
        Component("fossil", "source", "ch4", upper=100.0, cost=30.0),
        Component("blend", "converter", from_node="h2", to_node="ch4", efficiency=1.0),
        Component("load", "sink", "ch4", lower=11.0, upper=11.0),
    ]
    s = tiny(comps, nodes, h2_blend=0.1, blend_scope=scope)
    cfg = DispatchConfig.from_scenario(s)
    d = solve(s, cfg)[3]
    # h = 0.1 g and h + g = 11
    assert d.get("blend", "pg") == pytest.approx([1.0, 1.0])
    assert dispatch_residuals(s, cfg, d)["blend"] <= 1e-6
