"""Generator for the bundled five-region test system.

Published parameters (CO2 budgets, EU wholesale prices and emission factors,
WACC, initial PV/wind/offshore/electrolysis capacities, CAPEX, lifetimes and
learning indices) are set verbatim. Everything else (demand levels, hourly
profiles, link lengths, plant fleets, methane supply) is synthetic, drawn
from a seeded generator and tagged ``"provenance": "synthetic"``.

Run ``python -m lisa.testsystem OUTDIR`` to regenerate the files.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from lisa.scenario_io import SCHEMA_VERSION, UNITS, write_profiles

SEED = 20300
HOURS = 8760
REGIONS = ("north", "east", "west", "south")
PROFILE_FILE = "test_system.profiles.csv"
SYN = "synthetic"

YEARS = (2030, 2040, 2050)
CO2_BUDGET_MT = {2030: 200, 2040: 90, 2050: 0}
EU_PRICE = {2030: 67, 2040: 83, 2050: 87}
EU_CO2 = {2030: 0.4, 2040: 0.2, 2050: 0.0}
WACC = 0.07

# GW installed at the start of the pathway
INITIAL_GW = {"pv": 91.3, "offshore": 17.0, "onshore": 81.5, "electrolysis": 0.0}
PV_SHARE = {"north": 0.10, "east": 0.25, "west": 0.30, "south": 0.35}
ONSHORE_SHARE = {"north": 0.40, "east": 0.30, "west": 0.20, "south": 0.10}

CAPEX = {
    "offshore": {2030: 2691, 2040: 2326, 2050: 2011},
    "pv": {2030: 900, 2040: 793, 2050: 700},
    "electrolysis": {2030: 651, 2040: 479, 2050: 353},
    "onshore": {2030: 1200, 2040: 1112, 2050: 1031},
}
LIFETIME = {"offshore": 20, "pv": 25, "electrolysis": 15, "onshore": 20, "grid": 40}
LEARNING_R = {"offshore": 0.319, "pv": 0.20, "electrolysis": 0.133}
GRID_CAPEX = 40.0  # EUR/(kW*100km)

# MW per region and horizon
Z_MAX = {"pv": 12500, "onshore": 10000, "offshore": 24000, "electrolysis": 15000, "grid": 10000}

# synthetic regional data, MW averages
EL_DEMAND = {"north": 8000, "east": 10000, "west": 20000, "south": 18000}
HEAT_DEMAND = {"north": 3000, "east": 4000, "west": 8000, "south": 7000}
H2_DEMAND = {"north": 1000, "east": 1000, "west": 3000, "south": 2000}
CH4_DEMAND = {"north": 2000, "east": 3000, "west": 6000, "south": 5000}
GAS_PLANT = {"north": 3000, "east": 5000, "west": 12000, "south": 8000}
BIOMETHANE = {"north": 500, "east": 800, "west": 1000, "south": 1200}

EL_LINKS = {  # (a, b): (NTC MW, length km)
    ("north", "east"): (6000, 350),
    ("north", "west"): (8000, 300),
    ("east", "south"): (5000, 400),
    ("west", "south"): (7000, 350),
    ("north", "eu"): (5000, 300),
    ("west", "eu"): (5000, 250),
    ("south", "eu"): (5000, 300),
}
H2_LINKS = {("north", "east"): 350, ("north", "west"): 300, ("east", "south"): 400, ("west", "south"): 350}
CH4_NTC = 20000


def _ar1(rng, n, phi, sigma):
    e = rng.normal(0.0, sigma, n)
    out = np.empty(n)
    acc = 0.0
    for k in range(n):
        acc = phi * acc + e[k]
        out[k] = acc
    return out


def make_profiles(seed: int = SEED) -> dict[str, np.ndarray]:
    """Hourly availability factors (0..1) and demand shapes (mean 1)."""
    rng = np.random.default_rng(seed)
    t = np.arange(HOURS)
    hour = t % 24
    day = t // 24
    season = np.cos(2 * np.pi * (day - 172) / 365.0)  # +1 in summer
    out: dict[str, np.ndarray] = {}
    lat = {"north": 0.85, "east": 0.95, "west": 0.95, "south": 1.1}
    for r in REGIONS:
        sun = np.clip(np.sin(np.pi * (hour - 6 + 2 * season) / (12 + 4 * season)), 0.0, None)
        cloud = np.clip(0.75 + _ar1(rng, HOURS, 0.97, 0.05), 0.2, 1.0)
        out[f"pv_{r}"] = np.clip(0.75 * lat[r] * (0.6 + 0.4 * season) * sun * cloud, 0.0, 1.0)
        wind_level = {"north": 0.38, "east": 0.27, "west": 0.24, "south": 0.17}[r]
        w = np.clip(wind_level * (1.0 - 0.3 * season) + _ar1(rng, HOURS, 0.985, 0.035), 0.0, 0.95)
        out[f"onshore_{r}"] = w
        daily = 1.0 + 0.15 * np.sin(2 * np.pi * (hour - 8) / 24.0)
        el = daily * (1.0 - 0.08 * season) + _ar1(rng, HOURS, 0.9, 0.01)
        out[f"el_demand_{r}"] = el / el.mean()
        heat = np.clip(1.0 - 0.8 * season + 0.1 * np.sin(2 * np.pi * (hour - 6) / 24.0) + _ar1(rng, HOURS, 0.95, 0.02), 0.1, None)
        out[f"heat_demand_{r}"] = heat / heat.mean()
    out["offshore_north"] = np.clip(0.48 * (1.0 - 0.25 * season) + _ar1(rng, HOURS, 0.99, 0.03), 0.0, 0.97)
    return {k: np.round(v, 4) for k, v in out.items()}


def _ref(column: str, scale: float = 1.0) -> dict:
    d = {"file": PROFILE_FILE, "column": column}
    if scale != 1.0:
        d["scale"] = float(scale)
    return d


def _region_cap(total_gw: float, share: float) -> float:
    return round(total_gw * 1000.0 * share, 6)


def build_document(seed: int = SEED) -> dict:
    nodes, comps, convs, links, opts = [], [], [], [], []
    for r in REGIONS:
        for sec, tag in (("electricity", "el"), ("methane", "ch4"), ("hydrogen", "h2"), ("heat", "heat")):
            nodes.append({"id": f"{tag}_{r}", "sector": sec, "region": r})
    nodes.append({"id": "el_eu", "sector": "electricity", "region": "eu"})

    for r in REGIONS:
        el, ch4, h2, heat = f"el_{r}", f"ch4_{r}", f"h2_{r}", f"heat_{r}"
        demand = _ref(f"el_demand_{r}", EL_DEMAND[r])
        comps.append({"id": f"demand_el_{r}", "kind": "sink", "node": el, "lower": demand, "upper": demand, "provenance": SYN})
        hd = _ref(f"heat_demand_{r}", HEAT_DEMAND[r])
        comps.append({"id": f"demand_heat_{r}", "kind": "sink", "node": heat, "lower": hd, "upper": hd, "provenance": SYN})
        comps.append({"id": f"demand_h2_{r}", "kind": "sink", "node": h2, "lower": H2_DEMAND[r], "upper": H2_DEMAND[r], "provenance": SYN})
        comps.append({"id": f"demand_ch4_{r}", "kind": "sink", "node": ch4, "lower": CH4_DEMAND[r], "upper": CH4_DEMAND[r], "provenance": SYN})
        comps.append(
            {
                "id": f"pv_{r}",
                "kind": "source",
                "node": el,
                "upper": _ref(f"pv_{r}", _region_cap(INITIAL_GW["pv"], PV_SHARE[r])),
                "technology": "pv",
                "provenance": SYN,
            }
        )
        comps.append(
            {
                "id": f"onshore_{r}",
                "kind": "source",
                "node": el,
                "upper": _ref(f"onshore_{r}", _region_cap(INITIAL_GW["onshore"], ONSHORE_SHARE[r])),
                "technology": "onshore",
                "provenance": SYN,
            }
        )
        if r == "north":
            comps.append(
                {
                    "id": "offshore_north",
                    "kind": "source",
                    "node": el,
                    "upper": _ref("offshore_north", INITIAL_GW["offshore"] * 1000.0),
                    "technology": "offshore",
                    "provenance": SYN,
                }
            )
        comps.append({"id": f"fossil_ch4_{r}", "kind": "source", "node": ch4, "cost": 25.0, "co2": 0.2, "provenance": SYN})
        comps.append({"id": f"biomethane_{r}", "kind": "source", "node": ch4, "upper": BIOMETHANE[r], "cost": 70.0, "provenance": SYN})
        comps.append({"id": f"green_ch4_{r}", "kind": "source", "node": ch4, "cost": 140.0, "technology": "green_ch4", "provenance": SYN})
        comps.append(
            {
                "id": f"battery_{r}",
                "kind": "storage",
                "node": el,
                "p_g_max": 2000.0,
                "p_d_max": 2000.0,
                "e_max": 8000.0,
                "e_set": 4000.0,
                "eta_g": 0.95,
                "eta_d": 0.95,
                "technology": "battery",
                "provenance": SYN,
            }
        )
        for tag in ("el", "ch4", "h2", "heat"):
            comps.append({"id": f"slack_{tag}_{r}", "kind": "source", "node": f"{tag}_{r}", "cost": 10000.0, "technology": "slack", "provenance": SYN})
        convs += [
            {"id": f"gas_plant_{r}", "from_node": ch4, "to_node": el, "efficiency": 0.5, "upper": GAS_PLANT[r], "cost": 3.0, "technology": "gas_plant", "provenance": SYN},
            {"id": f"electrolyzer_{r}", "from_node": el, "to_node": h2, "efficiency": 0.7, "upper": 0.0, "technology": "electrolysis", "provenance": SYN},
            {"id": f"power_to_heat_{r}", "from_node": el, "to_node": heat, "efficiency": 0.99, "upper": 0.4 * HEAT_DEMAND[r], "technology": "power_to_heat", "provenance": SYN},
            {"id": f"gas_boiler_{r}", "from_node": ch4, "to_node": heat, "efficiency": 0.9, "upper": 2.5 * HEAT_DEMAND[r], "technology": "gas_boiler", "provenance": SYN},
            {"id": f"smr_{r}", "from_node": ch4, "to_node": h2, "efficiency": 0.7, "upper": 2.0 * H2_DEMAND[r], "technology": "smr", "provenance": SYN},
            {"id": f"h2_blending_{r}", "from_node": h2, "to_node": ch4, "efficiency": 1.0, "upper": 5000.0, "technology": "h2_blending", "provenance": SYN},
        ]
    comps += [
        {"id": "import_eu", "kind": "source", "node": "el_eu", "upper": 15000.0, "technology": "import", "provenance": SYN},
        {"id": "export_eu", "kind": "sink", "node": "el_eu", "upper": 15000.0, "technology": "export", "provenance": SYN},
    ]

    def both_ways(sector, tag, a, b, ntc, length, cost):
        na, nb = f"{tag}_{a}", f"{tag}_{b}"
        ids = (f"{tag}_{a}_{b}", f"{tag}_{b}_{a}")
        for lid, f, t in ((ids[0], na, nb), (ids[1], nb, na)):
            d = {"id": lid, "sector": sector, "from_node": f, "to_node": t, "ntc": float(ntc), "cost": cost, "provenance": SYN}
            if length:
                d["length_km"] = float(length)
            links.append(d)
        return ids

    grid = {y: GRID_CAPEX for y in YEARS}
    for (a, b), (ntc, length) in EL_LINKS.items():
        ids = both_ways("electricity", "el", a, b, ntc, length, 0.1)
        opts.append(
            {
                "id": f"grid_el_{a}_{b}",
                "technology": "grid_el",
                "targets": list(ids),
                "capex": {str(y): c * length / 100.0 for y, c in grid.items()},
                "lifetime": LIFETIME["grid"],
                "z_max": Z_MAX["grid"],
                "provenance": "published capex and lifetime; synthetic length and z_max",
            }
        )
    for (a, b), length in H2_LINKS.items():
        ids = both_ways("hydrogen", "h2", a, b, 0.0, length, 0.1)
        opts.append(
            {
                "id": f"grid_h2_{a}_{b}",
                "technology": "grid_h2",
                "targets": list(ids),
                "capex": {str(y): c * length / 100.0 for y, c in grid.items()},
                "lifetime": LIFETIME["grid"],
                "z_max": Z_MAX["grid"],
                "provenance": "published capex and lifetime; synthetic length and z_max",
            }
        )
    for a, b in (("north", "east"), ("north", "west"), ("east", "south"), ("west", "south")):
        both_ways("methane", "ch4", a, b, CH4_NTC, 0, 0.1)

    for r in REGIONS:
        for tech in ("pv", "onshore", "electrolysis") + (("offshore",) if r == "north" else ()):
            target = f"electrolyzer_{r}" if tech == "electrolysis" else f"{tech}_{r}"
            d = {
                "id": f"{tech}_{r}_new",
                "technology": tech,
                "targets": [target],
                "capex": {str(y): float(v) for y, v in CAPEX[tech].items()},
                "lifetime": LIFETIME[tech],
                "z_max": Z_MAX[tech],
                "region": r,
                "provenance": "published capex and lifetime; synthetic z_max",
            }
            if tech != "electrolysis":
                d["effect"] = _ref(f"{tech}_{r}")
            opts.append(d)

    learning = {
        tech: {"c0": float(CAPEX[tech][YEARS[0]]), "p0": INITIAL_GW[tech], "r": r}
        for tech, r in LEARNING_R.items()
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "units": dict(UNITS),
        "name": "five_region_test_system",
        "n_steps": HOURS,
        "step_hours": 1.0,
        "h2_blend": 0.2,
        "blend_scope": "node",
        "sectors": ["electricity", "methane", "hydrogen", "heat"],
        "nodes": nodes,
        "components": comps,
        "converters": convs,
        "links": links,
        "investment_options": opts,
        "pathway": {
            "base_year": YEARS[0],
            "years": list(YEARS),
            "terminal_year": 2060,
            "wacc": WACC,
            "co2_budget": {str(y): v * 1e6 for y, v in CO2_BUDGET_MT.items()},
            "external_price": {str(y): float(v) for y, v in EU_PRICE.items()},
            "external_co2": {str(y): float(v) for y, v in EU_CO2.items()},
            "import_components": ["import_eu"],
            "export_components": ["export_eu"],
        },
        "learning_curves": learning,
        "solver": {"n_pw": 10, "tol": 1e-4},
        "meta": {
            "seed": seed,
            "profiles": {"file": PROFILE_FILE, "provenance": SYN, "generator": "lisa.testsystem"},
            "initial_capacity_gw": INITIAL_GW,
        },
    }


def write(outdir: str | Path, seed: int = SEED):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_profiles(outdir / PROFILE_FILE, make_profiles(seed))
    (outdir / "test_system.json").write_text(json.dumps(build_document(seed), indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    write(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data")
