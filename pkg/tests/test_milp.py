import numpy as np
import pytest

from conftest import enumerate_milp, random_lp
from lisa.instances import knapsack, micro_instances, pw_single
from lisa.lp import EQ, LpBuilder, solve_lp
from lisa.lpfile import write_milp
from lisa.milp import NODE_LIMIT, MilpOptions, MilpProblem, is_feasible, solve_milp, sos2_ok


def test_pure_lp_matches_solve_lp():
    lp = random_lp(np.random.default_rng(5))
    res = solve_milp(MilpProblem(lp))
    ref = solve_lp(lp)
    assert res.objective == pytest.approx(ref.objective, abs=1e-9)
    assert res.bound == pytest.approx(ref.objective, abs=1e-9)


def test_knapsack_six_by_enumeration():
    p = knapsack(6)
    best, _ = enumerate_milp(p)
    res = solve_milp(p)
    assert res.optimal
    assert res.objective == pytest.approx(best, abs=1e-9)


@pytest.mark.parametrize("P, expect", [(25.0, 30.0), (50.0, 60.0), (120.0, 108.0)])
def test_sos2_selects_segment(P, expect):
    res = solve_milp(pw_single(P))
    assert res.objective == pytest.approx(expect)
    g = res.x[:4]
    assert sos2_ok(g, 1e-9)


def test_sos2_maximize_interpolated_value():
    # maximize the concave interpolant at a fixed P: per-adjacent-pair LPs as oracle
    y = np.array([0.0, 1.0, 2.0, 3.0])
    val = np.array([0.0, 5.0, 8.0, 9.0])
    P = 1.4
    b = LpBuilder()
    g = [b.add_col(f"g{k}", -val[k], 0.0, 1.0) for k in range(4)]
    b.add_row("conv", [(j, 1.0) for j in g], EQ, 1.0)
    b.add_row("level", [(j, y[k]) for k, j in enumerate(g)], EQ, P)
    lp = b.build()
    oracle = np.inf
    for k in range(3):
        ub = np.zeros(4)
        ub[[k, k + 1]] = 1.0
        sol = solve_lp(lp.replace(ub=ub))
        if sol.optimal:
            oracle = min(oracle, sol.objective)
    res = solve_milp(MilpProblem(lp, sos2=(tuple(g),)))
    assert res.objective == pytest.approx(oracle)
    assert res.objective == pytest.approx(-(5.0 + 0.4 * 3.0))


@pytest.mark.parametrize("name", sorted(micro_instances()))
def test_bundled_instances_equal_enumeration(name):
    p = micro_instances()[name]
    best, _ = enumerate_milp(p)
    res = solve_milp(p)
    assert res.optimal
    assert res.objective == pytest.approx(best, rel=1e-9, abs=1e-9)
    assert is_feasible(p, res.x)
    assert res.gap_abs <= 1e-6 * max(1.0, abs(res.objective))


@pytest.mark.parametrize("name", sorted(micro_instances()))
def test_root_relaxation_is_a_bound(name):
    p = micro_instances()[name]
    relaxed = solve_lp(p.lp)
    assert relaxed.objective <= solve_milp(p).objective + 1e-9


def test_node_limit_reports_honest_gap():
    p = knapsack(12)
    res = solve_milp(p, MilpOptions(node_limit=3))
    assert res.status == NODE_LIMIT
    full = solve_milp(p)
    assert res.bound <= full.objective + 1e-9
    assert res.bound <= res.objective + 1e-9
    if res.x is not None:
        assert is_feasible(p, res.x)


def test_incumbent_start_is_used_and_validated():
    p = knapsack(6)
    ref = solve_milp(p)
    assert solve_milp(p, start=ref.x).objective == pytest.approx(ref.objective)
    bad = np.full(p.lp.n_cols, 0.5)
    assert solve_milp(p, start=bad).objective == pytest.approx(ref.objective)


def test_deterministic_nodes():
    p = micro_instances()["pw_three"]
    a, b = solve_milp(p), solve_milp(p)
    assert a.nodes == b.nodes
    assert np.array_equal(a.x, b.x)


def test_problem_validation():
    lp = random_lp(np.random.default_rng(1), m=3, n=4)
    with pytest.raises(ValueError):
        MilpProblem(lp, binaries=(0,))  # bounds reach beyond 1
    lp01 = lp.replace(ub=np.ones(4))
    with pytest.raises(ValueError):
        MilpProblem(lp01, sos2=((0, 1), (1, 2)))


def test_sos2_ok():
    assert sos2_ok(np.array([0.0, 0.3, 0.7, 0.0]), 1e-9)
    assert not sos2_ok(np.array([0.3, 0.0, 0.7, 0.0]), 1e-9)
    assert sos2_ok(np.array([0.0, 0.0, 1.0]), 1e-9)


def test_milp_file_has_integer_sections(tmp_path):
    p = micro_instances()["learning_toy"]
    path = tmp_path / "m.lp"
    write_milp(path, p)
    text = path.read_text()
    assert "Binaries" in text or "Binary" in text
    assert "SOS" in text and "S2::" in text
