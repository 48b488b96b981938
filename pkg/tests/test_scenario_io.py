import json
import shutil

import numpy as np
import pytest

from lisa.pathway import make_pathway, solve_closed
from lisa.scenario_io import (
    SCHEMA_VERSION,
    ProfileError,
    ScenarioFormatError,
    builtin_test_system,
    data_path,
    load_scenario,
    load_solution,
    resolve_scenario,
    save_scenario,
    save_solution,
    scenarios_equal,
    solutions_equal,
)


@pytest.fixture(scope="module")
def system():
    return builtin_test_system()


def bundled_doc():
    return json.loads(data_path("test_system.json").read_text())


def copy_bundle(tmp_path):
    for name in ("test_system.json", "test_system.profiles.csv"):
        shutil.copy(data_path(name), tmp_path / name)
    return tmp_path / "test_system.json"


def test_regions_and_years(system):
    assert sorted({n.region for n in system.nodes}) == ["east", "eu", "north", "south", "west"]
    assert system.n_steps == 8760
    pw = system.pathway
    assert pw.years == (2030, 2040, 2050) and pw.terminal_year == 2060 and pw.base_year == 2030


def test_published_pathway_constants(system):
    pw = system.pathway
    assert [pw.co2_budget[y] / 1e6 for y in pw.years] == [200.0, 90.0, 0.0]  # Mt
    assert [pw.external_price[y] for y in pw.years] == [67.0, 83.0, 87.0]
    assert [pw.external_co2[y] for y in pw.years] == [0.4, 0.2, 0.0]
    assert pw.wacc == 0.07
    assert system.solver["n_pw"] == 10


def test_external_price_applied_per_year(system):
    for year, price in ((2030, 67.0), (2040, 83.0), (2050, 87.0)):
        s = system.for_year(year)
        (imp,) = [c for c in s.components if c.id == "import_eu"]
        assert imp.cost == price


CAPEX = {
    "offshore": (2691.0, 2326.0, 2011.0),
    "pv": (900.0, 793.0, 700.0),
    "electrolysis": (651.0, 479.0, 353.0),
    "onshore": (1200.0, 1112.0, 1031.0),
}
LIFETIME = {"offshore": 20, "pv": 25, "electrolysis": 15, "onshore": 20, "grid_el": 40, "grid_h2": 40}


def test_published_technology_constants(system):
    seen = set()
    for o in system.options:
        seen.add(o.technology)
        assert o.lifetime == LIFETIME[o.technology]
        if o.technology in CAPEX:
            assert tuple(o.capex[y] for y in (2030, 2040, 2050)) == CAPEX[o.technology]
    assert seen == set(LIFETIME)
    assert system.option("offshore_north_new").capex[2040] == 2326.0


def test_grid_capex_per_length(system):
    links = {l.id: l for l in system.links}
    for o in system.options:
        if o.technology.startswith("grid"):
            length = links[o.targets[0]].length_km
            assert [o.capex[y] for y in (2030, 2040, 2050)] == pytest.approx([40.0 * length / 100.0] * 3)


def test_learning_and_initial_capacity(system):
    lc = system.learning
    assert (lc["offshore"].c0, lc["offshore"].p0, lc["offshore"].r) == (2691.0, 17.0, 0.319)
    assert (lc["pv"].c0, lc["pv"].p0, lc["pv"].r) == (900.0, 91.3, 0.20)
    assert (lc["electrolysis"].c0, lc["electrolysis"].p0, lc["electrolysis"].r) == (651.0, 0.0, 0.133)
    assert system.meta["initial_capacity_gw"] == {"pv": 91.3, "offshore": 17.0, "onshore": 81.5, "electrolysis": 0.0}


def test_synthetic_fields_carry_provenance():
    doc = bundled_doc()
    for section in ("components", "converters", "links"):
        for item in doc[section]:
            assert item.get("provenance") == "synthetic", (section, item["id"])
    for o in doc["investment_options"]:
        assert "synthetic" in o["provenance"]
    assert doc["meta"]["profiles"]["provenance"] == "synthetic"
    assert isinstance(doc["meta"]["seed"], int)


def test_scenario_roundtrip(tmp_path, system):
    s = system.truncated(48)
    save_scenario(s, tmp_path / "a.json")
    assert (tmp_path / "a.profiles.csv").is_file()
    back = load_scenario(tmp_path / "a.json")
    assert scenarios_equal(s, back)
    save_scenario(back, tmp_path / "b.json")
    assert scenarios_equal(back, load_scenario(tmp_path / "b.json"))
    assert (tmp_path / "a.profiles.csv").read_text() == (tmp_path / "b.profiles.csv").read_text()


def test_full_bundle_roundtrip(tmp_path, system):
    save_scenario(system, tmp_path / "x.json")
    assert scenarios_equal(system, load_scenario(tmp_path / "x.json"))


def test_unknown_sector_names_field(tmp_path):
    doc = bundled_doc()
    doc["nodes"][3]["sector"] = "steam"
    path = copy_bundle(tmp_path)
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioFormatError) as info:
        load_scenario(path)
    assert info.value.pointer == "/nodes/3/sector"
    assert "/nodes/3/sector" in str(info.value)


def test_wrong_schema_version(tmp_path):
    doc = bundled_doc()
    doc["schema_version"] = SCHEMA_VERSION + 1
    path = copy_bundle(tmp_path)
    path.write_text(json.dumps(doc))
    with pytest.raises(ScenarioFormatError) as info:
        load_scenario(path)
    assert info.value.pointer == "/schema_version"


def test_profile_nan_reports_line(tmp_path):
    path = copy_bundle(tmp_path)
    csv_path = tmp_path / "test_system.profiles.csv"
    lines = csv_path.read_text().splitlines()
    cells = lines[10].split(",")
    cells[0] = "nan"
    lines[10] = ",".join(cells)
    csv_path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ProfileError) as info:
        load_scenario(path)
    assert info.value.line == 11


def test_truncated_profile_reports_line(tmp_path):
    path = copy_bundle(tmp_path)
    csv_path = tmp_path / "test_system.profiles.csv"
    lines = csv_path.read_text().splitlines()
    csv_path.write_text("\n".join(lines[:101]) + "\n")  # header plus 100 rows
    with pytest.raises(ProfileError) as info:
        load_scenario(path)
    assert info.value.line == 102
    assert "test_system.profiles.csv" in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioFormatError):
        load_scenario(tmp_path / "nope.json")
    with pytest.raises(ScenarioFormatError):
        load_solution(tmp_path)


def test_builtin_references():
    assert resolve_scenario("builtin:micro").n_steps == 24


@pytest.fixture(scope="module")
def pathway_solution():
    s = builtin_test_system(12)
    return solve_closed(make_pathway(s, "linear"))


def test_solution_roundtrip_bit_exact(tmp_path, pathway_solution):
    paths = save_solution(pathway_solution, tmp_path)
    assert sorted(p.name for p in paths) == ["costs.csv", "flows.csv", "investments.csv", "solution.json"]
    back = load_solution(tmp_path)
    assert back.objective == pathway_solution.objective
    assert solutions_equal(pathway_solution, back)


def read_table(path):
    lines = path.read_text().splitlines()
    head = lines[0].split(",")
    return head, {r.split(",")[0]: np.array([float(v) for v in r.split(",")[1:]]) for r in lines[1:]}


def test_costs_total_is_sum(tmp_path, pathway_solution):
    save_solution(pathway_solution, tmp_path)
    head, rows = read_table(tmp_path / "costs.csv")
    assert head == ["cost", "2030", "2040", "2050", "Total"]
    assert np.allclose(rows["Total"], rows["Operating"] + rows["Investment"], rtol=0, atol=1e-6)
    assert rows["Total"][-1] == pytest.approx(pathway_solution.objective / 1e9, rel=1e-12)


def test_investments_layout(tmp_path, pathway_solution):
    save_solution(pathway_solution, tmp_path)
    head, rows = read_table(tmp_path / "investments.csv")
    assert head == ["technology", "2030", "2040", "2050", "Total"]
    assert set(rows) == set(pathway_solution.technology)
    for tech, v in rows.items():
        assert v[:3] == pytest.approx(pathway_solution.technology[tech] / 1000.0)
        assert v[3] == pytest.approx(v[:3].sum())
