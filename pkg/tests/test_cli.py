import json
import shutil

import numpy as np
import pytest

from lisa.cli import EXIT_GAP, EXIT_INFEASIBLE, EXIT_OK, EXIT_SCHEMA, EXIT_SEMANTIC, main
from lisa.learning import encoding_at
from lisa.lp import solve_lp
from lisa.pathway import investment_cost_by_horizon, make_pathway
from lisa.scenario import Component, Node, Scenario
from lisa.scenario_io import data_path, load_solution, micro_scenario, save_scenario


def bundle(tmp_path):
    for name in ("test_system.json", "test_system.profiles.csv"):
        shutil.copy(data_path(name), tmp_path / name)
    return tmp_path / "test_system.json"


def test_validate_builtin(capsys):
    assert main(["validate", "--scenario", "builtin:micro"]) == EXIT_OK
    assert "ok" in capsys.readouterr().err


def test_validate_missing_file(tmp_path):
    assert main(["validate", "--scenario", str(tmp_path / "none.json")]) == EXIT_SCHEMA


def test_validate_schema_error(tmp_path, capsys):
    path = bundle(tmp_path)
    doc = json.loads(path.read_text())
    doc["nodes"][0]["sector"] = "steam"
    path.write_text(json.dumps(doc))
    assert main(["validate", "--scenario", str(path)]) == EXIT_SCHEMA
    assert "/nodes/0/sector" in capsys.readouterr().err


def test_validate_truncated_profile(tmp_path, capsys):
    path = bundle(tmp_path)
    csv_path = tmp_path / "test_system.profiles.csv"
    lines = csv_path.read_text().splitlines()
    csv_path.write_text("\n".join(lines[:500]) + "\n")
    assert main(["validate", "--scenario", str(path)]) == EXIT_SEMANTIC
    err = capsys.readouterr().err
    assert "test_system.profiles.csv:501" in err


def test_semantic_error(tmp_path):
    s = Scenario("bad", 4, 1.0, (Node("el", "electricity"),), (Component("x", "sink", "nowhere"),))
    save_scenario(s, tmp_path / "bad.json")
    assert main(["validate", "--scenario", str(tmp_path / "bad.json")]) == EXIT_SEMANTIC


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--scenario", "builtin:micro", "--horizon-hours", "1"],
        ["solve", "--scenario", "builtin:micro", "--mode", "dispatch", "--method", "benders"],
        ["solve", "--scenario", "builtin:micro", "--npw", "2"],
        ["solve", "--scenario", "builtin:micro", "--tol", "0"],
    ],
)
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_infeasible_exit(tmp_path):
    comps = (Component("src", "source", "el", upper=1.0, cost=1.0), Component("load", "sink", "el", lower=3.0, upper=3.0))
    save_scenario(Scenario("short", 4, 1.0, (Node("el", "electricity"),), comps), tmp_path / "s.json")
    code = main(["solve", "--scenario", str(tmp_path / "s.json"), "--mode", "dispatch", "--out", str(tmp_path / "o")])
    assert code == EXIT_INFEASIBLE


def test_gap_exit_still_writes_artifacts(tmp_path):
    out = tmp_path / "o"
    argv = ["solve", "--scenario", "builtin:micro", "--method", "benders", "--max-iter", "2", "--horizon-hours", "6"]
    assert main(argv + ["--out", str(out)]) == EXIT_GAP
    sol = load_solution(out)
    assert sol.status == "iteration_limit" and sol.log is not None
    assert len(sol.log.records) == 2


def test_dispatch_and_eacp_modes(tmp_path):
    for mode in ("dispatch", "eacp"):
        out = tmp_path / mode
        argv = ["solve", "--scenario", "builtin:micro", "--mode", mode, "--year", "2040", "--horizon-hours", "12"]
        assert main(argv + ["--out", str(out)]) == EXIT_OK
        assert load_solution(out).mode == mode


def solve_objective(tmp_path, method, costs, hours):
    out = tmp_path / f"{method}_{costs}_{hours}"
    argv = ["solve", "--scenario", "builtin:micro", "--method", method, "--costs", costs, "--horizon-hours", str(hours)]
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    return load_solution(out)


def test_closed_and_benders_agree(tmp_path):
    closed = solve_objective(tmp_path, "closed", "linear", 24)
    bd = solve_objective(tmp_path, "benders", "linear", 24)
    assert abs(bd.objective - closed.objective) / closed.objective <= 1e-4
    assert (tmp_path / "benders_linear_24" / "benders_log.csv").is_file()


def learning_prices_dominate(hours):
    """Learning pricing of the linear-cost optimum is no dearer than its linear pricing."""
    s = micro_scenario(hours)
    lin, lrn = make_pathway(s, "linear"), make_pathway(s, "learning")
    x = solve_lp(lin.closed_problem().lp).x
    n_x = lin.block_offsets()[-1]
    z = x[n_x : n_x + lin.n_z]
    cheap = investment_cost_by_horizon(lrn, np.concatenate([z, encoding_at(lrn, z)])).sum()
    return cheap <= investment_cost_by_horizon(lin, z).sum()


def test_learning_not_above_linear(tmp_path):
    assert learning_prices_dominate(12)
    linear = solve_objective(tmp_path, "closed", "linear", 12)
    learning = solve_objective(tmp_path, "benders", "learning", 12)
    # benders stops within its relative tolerance of the learning optimum
    assert learning.objective <= linear.objective * (1 + 1e-4)


def test_report(tmp_path, capsys):
    out = tmp_path / "gap"
    main(["solve", "--scenario", "builtin:micro", "--method", "benders", "--max-iter", "3", "--horizon-hours", "6", "--out", str(out)])
    assert main(["report", "--solution", str(out), "--out", str(tmp_path / "r")]) == EXIT_OK
    assert (tmp_path / "r" / "convergence.svg").is_file() and (tmp_path / "r" / "investments.svg").is_file()
    (out / "benders_log.csv").unlink()
    capsys.readouterr()
    assert main(["report", "--solution", str(out), "--out", str(tmp_path / "r2")]) == EXIT_OK
    assert "convergence plot skipped" in capsys.readouterr().err
    assert not (tmp_path / "r2" / "convergence.svg").exists()


def test_report_missing_solution(tmp_path):
    assert main(["report", "--solution", str(tmp_path), "--out", str(tmp_path / "r")]) == EXIT_SCHEMA
