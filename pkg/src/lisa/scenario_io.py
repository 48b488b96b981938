"""Scenario files (JSON plus sidecar profile CSVs) and solution artifacts.

File units equal the in-memory units (MW, MWh, EUR/MWh, EUR/kW, t/MWh,
t/a); the ``units`` header states them and loading rejects anything else.
Profile-valued fields hold a number or ``{"file", "column", "scale"}``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, fields
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from lisa.benders import BendersLog
from lisa.model import DispatchSolution, Owner, flow_summary
from lisa.pathway import PathwaySolution
from lisa.scenario import (
    KINDS,
    SECTORS,
    Component,
    InvestmentOption,
    LearningParams,
    Link,
    Node,
    PathwayData,
    Scenario,
)

SCHEMA_VERSION = 1
BN_EUR = 1e9
UNITS = {
    "power": "MW",
    "energy": "MWh",
    "variable_cost": "EUR/MWh",
    "capex": "EUR/kW",
    "grid_capex": "EUR/(kW*100km)",
    "co2_factor": "t/MWh",
    "co2_budget": "t/a",
    "length": "km",
    "time_step": "h",
}
PROFILE_FIELDS = ("lower", "upper", "p_g_max", "p_d_max", "xi")


class ScenarioFormatError(ValueError):
    """Malformed scenario document; ``pointer`` locates the offending value."""

    def __init__(self, file: str, pointer: str, message: str):
        self.file, self.pointer = file, pointer
        super().__init__(f"{file}: {pointer or '/'}: {message}")


class ProfileError(ValueError):
    """Bad profile CSV content; ``line`` is 1-based and counts the header."""

    def __init__(self, file: str, line: int, message: str):
        self.file, self.line = file, line
        super().__init__(f"{file}:{line}: {message}")


# --- schema -----------------------------------------------------------------

_num = {"type": "number"}
_numish = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf"]}]}
_ref = {
    "type": "object",
    "required": ["file", "column"],
    "additionalProperties": False,
    "properties": {"file": {"type": "string"}, "column": {"type": "string"}, "scale": _num},
}
_profile = {"oneOf": [_numish, _ref]}
_year_map = {
    "type": "object",
    "propertyNames": {"pattern": "^[0-9]{4}$"},
    "additionalProperties": _num,
}
_id = {"type": "string", "minLength": 1}

_component_props = {
    "id": _id,
    "kind": {"enum": list(KINDS)},
    "node": _id,
    "lower": _profile,
    "upper": _profile,
    "cost": _num,
    "co2": _num,
    "e_max": _num,
    "eta_g": _num,
    "eta_d": _num,
    "p_g_max": _profile,
    "p_d_max": _profile,
    "xi": _profile,
    "e_set": _num,
    "technology": {"type": "string"},
    "provenance": {"type": "string"},
}
_converter_props = {
    "id": _id,
    "from_node": _id,
    "to_node": _id,
    "efficiency": _num,
    "lower": _profile,
    "upper": _profile,
    "cost": _num,
    "technology": {"type": "string"},
    "provenance": {"type": "string"},
}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "units", "name", "n_steps", "nodes"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "units": {"const": UNITS},
        "name": {"type": "string"},
        "n_steps": {"type": "integer", "minimum": 1},
        "step_hours": {"type": "number", "exclusiveMinimum": 0},
        "h2_blend": _num,
        "blend_scope": {"enum": ["node", "system"]},
        "co2_budget_per_year": {"oneOf": [_num, {"type": "null"}]},
        "sectors": {"type": "array", "items": {"enum": list(SECTORS)}},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "sector"],
                "additionalProperties": False,
                "properties": {"id": _id, "sector": {"enum": list(SECTORS)}, "region": {"type": "string"}},
            },
        },
        "components": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind", "node"],
                "additionalProperties": False,
                "properties": {**_component_props, "kind": {"enum": ["source", "sink", "storage"]}},
            },
        },
        "converters": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "from_node", "to_node", "efficiency"],
                "additionalProperties": False,
                "properties": _converter_props,
            },
        },
        "links": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "sector", "from_node", "to_node", "ntc"],
                "additionalProperties": False,
                "properties": {
                    "id": _id,
                    "sector": {"enum": list(SECTORS)},
                    "from_node": _id,
                    "to_node": _id,
                    "ntc": _num,
                    "length_km": _num,
                    "cost": _num,
                    "provenance": {"type": "string"},
                },
            },
        },
        "investment_options": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "technology", "targets", "capex", "lifetime"],
                "additionalProperties": False,
                "properties": {
                    "id": _id,
                    "technology": _id,
                    "targets": {"type": "array", "items": _id, "minItems": 1},
                    "capex": _year_map,
                    "lifetime": _num,
                    "effect": _profile,
                    "z_max": _numish,
                    "region": {"type": "string"},
                    "provenance": {"type": "string"},
                },
            },
        },
        "pathway": {
            "type": "object",
            "required": ["base_year", "years", "terminal_year", "wacc", "co2_budget"],
            "additionalProperties": False,
            "properties": {
                "base_year": {"type": "integer"},
                "years": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                "terminal_year": {"type": "integer"},
                "wacc": _num,
                "co2_budget": _year_map,
                "external_price": _year_map,
                "external_co2": _year_map,
                "import_components": {"type": "array", "items": _id},
                "export_components": {"type": "array", "items": _id},
                "overrides": {
                    "type": "object",
                    "propertyNames": {"pattern": "^[0-9]{4}$"},
                    "additionalProperties": {
                        "type": "object",
                        "additionalProperties": {"type": "object", "additionalProperties": _num},
                    },
                },
                "caps": {"type": "object", "additionalProperties": _year_map},
            },
        },
        "learning_curves": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["c0", "p0", "r"],
                "additionalProperties": False,
                "properties": {"c0": _num, "p0": _num, "r": _num},
            },
        },
        "solver": {"type": "object"},
        "meta": {"type": "object"},
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _pointer(path) -> str:
    return "".join(f"/{str(p).replace('~', '~0').replace('/', '~1')}" for p in path)


def check_schema(doc: dict, file: str = "<scenario>"):
    """Raise :class:`ScenarioFormatError` for the first schema violation (deepest path first)."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (-len(e.absolute_path), _pointer(e.absolute_path)))
    if errors:
        err = errors[0]
        # oneOf failures hide the useful message in their context
        if err.context:
            err = max(err.context, key=lambda e: len(e.absolute_path))
        raise ScenarioFormatError(file, _pointer(err.absolute_path), err.message)


# --- profiles ---------------------------------------------------------------


@lru_cache(maxsize=16)
def _read_csv_cached(path: str, mtime: float) -> tuple[tuple[str, ...], dict[str, np.ndarray]]:
    name = Path(path).name
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise ProfileError(name, 1, "empty profile file") from None
        cols: list[list[float]] = [[] for _ in header]
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise ProfileError(name, line, f"expected {len(header)} fields, found {len(row)}")
            for j, cell in enumerate(row):
                try:
                    v = float(cell)
                except ValueError:
                    raise ProfileError(name, line, f"column {header[j]!r}: {cell!r} is not a number") from None
                if math.isnan(v):
                    raise ProfileError(name, line, f"column {header[j]!r}: NaN")
                cols[j].append(v)
    data = {h: np.array(c, dtype=float) for h, c in zip(header, cols)}
    for arr in data.values():
        arr.setflags(write=False)
    return header, data


def read_profiles(path: Path) -> dict[str, np.ndarray]:
    path = Path(path)
    return _read_csv_cached(str(path.resolve()), path.stat().st_mtime)[1]


def _numval(v) -> float:
    if v == "inf":
        return math.inf
    if v == "-inf":
        return -math.inf
    return float(v)


class _Resolver:
    def __init__(self, base: Path, file: str, n: int):
        self.base, self.file, self.n = base, file, n

    def __call__(self, value, pointer: str):
        if not isinstance(value, dict):
            return _numval(value)
        path = self.base / value["file"]
        if not path.is_file():
            raise ScenarioFormatError(self.file, pointer + "/file", f"profile file {value['file']!r} not found")
        data = read_profiles(path)
        col = value["column"]
        if col not in data:
            raise ScenarioFormatError(self.file, pointer + "/column", f"no column {col!r} in {value['file']}")
        arr = data[col]
        if len(arr) < self.n:
            raise ProfileError(
                Path(value["file"]).name, len(arr) + 2, f"column {col!r} has {len(arr)} rows, expected {self.n}"
            )
        if len(arr) > self.n:
            raise ProfileError(
                Path(value["file"]).name, self.n + 2, f"column {col!r} has {len(arr)} rows, expected {self.n}"
            )
        return arr * float(value.get("scale", 1.0))


# --- load -------------------------------------------------------------------


def _years(d: dict | None) -> dict[int, float]:
    return {int(k): float(v) for k, v in (d or {}).items()}


def scenario_from_dict(doc: dict, base: Path = Path("."), file: str = "<scenario>") -> Scenario:
    check_schema(doc, file)
    n = int(doc["n_steps"])
    res = _Resolver(Path(base), file, n)
    nodes = tuple(Node(d["id"], d["sector"], d.get("region", "")) for d in doc["nodes"])
    comps = []
    for i, d in enumerate(doc.get("components", [])):
        kw = {k: v for k, v in d.items()}
        for f in PROFILE_FIELDS:
            if f in kw:
                kw[f] = res(kw[f], f"/components/{i}/{f}")
        comps.append(Component(**kw))
    for i, d in enumerate(doc.get("converters", [])):
        kw = {k: v for k, v in d.items()}
        for f in ("lower", "upper"):
            if f in kw:
                kw[f] = res(kw[f], f"/converters/{i}/{f}")
        comps.append(Component(kind="converter", **kw))
    links = tuple(Link(**d) for d in doc.get("links", []))
    opts = []
    for i, d in enumerate(doc.get("investment_options", [])):
        kw = dict(d)
        kw["targets"] = tuple(kw["targets"])
        kw["capex"] = _years(kw["capex"])
        if "effect" in kw:
            kw["effect"] = res(kw["effect"], f"/investment_options/{i}/effect")
        if "z_max" in kw:
            kw["z_max"] = _numval(kw["z_max"])
        opts.append(InvestmentOption(**kw))
    pathway = None
    if "pathway" in doc:
        p = doc["pathway"]
        pathway = PathwayData(
            base_year=int(p["base_year"]),
            years=tuple(int(y) for y in p["years"]),
            terminal_year=int(p["terminal_year"]),
            wacc=float(p["wacc"]),
            co2_budget=_years(p["co2_budget"]),
            external_price=_years(p.get("external_price")),
            external_co2=_years(p.get("external_co2")),
            import_components=tuple(p.get("import_components", ())),
            export_components=tuple(p.get("export_components", ())),
            overrides={int(y): {c: dict(f) for c, f in ov.items()} for y, ov in p.get("overrides", {}).items()},
            caps={k: _years(v) for k, v in p.get("caps", {}).items()},
        )
    learning = {k: LearningParams(float(v["c0"]), float(v["p0"]), float(v["r"])) for k, v in doc.get("learning_curves", {}).items()}
    return Scenario(
        name=doc["name"],
        n_steps=n,
        step_hours=float(doc.get("step_hours", 1.0)),
        nodes=nodes,
        components=tuple(comps),
        links=links,
        options=tuple(opts),
        learning=learning,
        pathway=pathway,
        co2_budget_per_year=doc.get("co2_budget_per_year"),
        h2_blend=float(doc.get("h2_blend", 1.0)),
        blend_scope=doc.get("blend_scope", "node"),
        solver=dict(doc.get("solver", {})),
        meta=dict(doc.get("meta", {})),
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario file and resolve its profile references (relative to the file)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ScenarioFormatError(str(path), "", "file not found") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(path.name, "", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return scenario_from_dict(doc, path.parent, path.name)


# --- save -------------------------------------------------------------------


def _jnum(v: float):
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


class _ProfileSink:
    def __init__(self, file: str):
        self.file = file
        self.columns: dict[str, np.ndarray] = {}

    def __call__(self, value, name: str):
        arr = np.asarray(value, dtype=float)
        if arr.ndim == 0:
            return _jnum(arr)
        self.columns[name] = arr
        return {"file": self.file, "column": name}


_CONVERTER_OPTIONAL = ("lower", "upper", "cost", "technology", "provenance")
_COMPONENT_OPTIONAL = (
    "lower", "upper", "cost", "co2", "e_max", "eta_g", "eta_d",
    "p_g_max", "p_d_max", "xi", "e_set", "technology", "provenance",
)


def scenario_to_dict(s: Scenario, sink: _ProfileSink) -> dict:
    defaults = {f.name: f.default for f in fields(Component)}
    comps, convs = [], []
    for c in s.components:
        if c.kind == "converter":
            d = {"id": c.id, "from_node": c.from_node, "to_node": c.to_node, "efficiency": c.efficiency}
            keys = _CONVERTER_OPTIONAL
        else:
            d = {"id": c.id, "kind": c.kind, "node": c.node}
            keys = _COMPONENT_OPTIONAL
        for k in keys:
            v = getattr(c, k)
            if k in PROFILE_FIELDS:
                if isinstance(v, np.ndarray) or v != defaults[k]:
                    d[k] = sink(v, f"{c.id}.{k}")
            elif v != defaults[k]:
                d[k] = _jnum(v) if isinstance(v, float) else v
        (convs if c.kind == "converter" else comps).append(d)
    links = []
    for l in s.links:
        d = {"id": l.id, "sector": l.sector, "from_node": l.from_node, "to_node": l.to_node, "ntc": _jnum(l.ntc)}
        if l.length_km:
            d["length_km"] = l.length_km
        if l.cost:
            d["cost"] = l.cost
        if l.provenance:
            d["provenance"] = l.provenance
        links.append(d)
    opts = []
    for o in s.options:
        d = {
            "id": o.id,
            "technology": o.technology,
            "targets": list(o.targets),
            "capex": {str(y): v for y, v in sorted(o.capex.items())},
            "lifetime": o.lifetime,
        }
        if isinstance(o.effect, np.ndarray) or o.effect != 1.0:
            d["effect"] = sink(o.effect, f"{o.id}.effect")
        if o.z_max != math.inf:
            d["z_max"] = _jnum(o.z_max)
        if o.region:
            d["region"] = o.region
        if o.provenance:
            d["provenance"] = o.provenance
        opts.append(d)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "units": dict(UNITS),
        "name": s.name,
        "n_steps": s.n_steps,
        "step_hours": s.step_hours,
        "h2_blend": s.h2_blend,
        "blend_scope": s.blend_scope,
        "sectors": sorted({n.sector for n in s.nodes}, key=SECTORS.index),
        "nodes": [{"id": n.id, "sector": n.sector, **({"region": n.region} if n.region else {})} for n in s.nodes],
        "components": comps,
        "converters": convs,
        "links": links,
        "investment_options": opts,
    }
    if s.co2_budget_per_year is not None:
        doc["co2_budget_per_year"] = s.co2_budget_per_year
    pw = s.pathway
    if pw is not None:
        ys = lambda m: {str(y): v for y, v in sorted(m.items())}  # noqa: E731
        doc["pathway"] = {
            "base_year": pw.base_year,
            "years": list(pw.years),
            "terminal_year": pw.terminal_year,
            "wacc": pw.wacc,
            "co2_budget": ys(pw.co2_budget),
            "external_price": ys(pw.external_price),
            "external_co2": ys(pw.external_co2),
            "import_components": list(pw.import_components),
            "export_components": list(pw.export_components),
            "overrides": {str(y): ov for y, ov in sorted(pw.overrides.items())},
            "caps": {k: ys(v) for k, v in pw.caps.items()},
        }
    if s.learning:
        doc["learning_curves"] = {k: {"c0": v.c0, "p0": v.p0, "r": v.r} for k, v in s.learning.items()}
    if s.solver:
        doc["solver"] = s.solver
    if s.meta:
        doc["meta"] = s.meta
    return doc


def write_profiles(path: Path, columns: dict[str, np.ndarray]):
    names = list(columns)
    n = max((len(v) for v in columns.values()), default=0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for k in range(n):
            w.writerow([repr(float(columns[c][k])) for c in names])


def save_scenario(s: Scenario, path: str | Path):
    """Write ``path`` and, if any series exist, ``<stem>.profiles.csv`` beside it."""
    path = Path(path)
    sink = _ProfileSink(f"{path.stem}.profiles.csv")
    doc = scenario_to_dict(s, sink)
    if sink.columns:
        write_profiles(path.parent / sink.file, sink.columns)
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def canonical(s: Scenario) -> dict:
    """Plain-data view of a scenario for structural comparison."""
    sink = _ProfileSink("profiles.csv")
    doc = scenario_to_dict(s, sink)
    doc["_profiles"] = {k: v.tolist() for k, v in sink.columns.items()}
    return doc


def scenarios_equal(a: Scenario, b: Scenario) -> bool:
    return canonical(a) == canonical(b)


# --- solutions --------------------------------------------------------------

SOLUTION_FILES = ("solution.json", "investments.csv", "costs.csv", "flows.csv")


def _plain(v):
    """JSON-ready copy: arrays to lists, floats exact, infinities as strings."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _jnum(v)
    return v


def _arr(v) -> np.ndarray:
    return np.array([float(x) for x in v], dtype=float)


def _dispatch_to_dict(d: DispatchSolution | None):
    if d is None:
        return None
    return {
        "status": d.status,
        "objective": d.objective,
        "n_steps": d.n_steps,
        "step_hours": d.step_hours,
        "co2_emissions": d.co2_emissions,
        "co2_price": d.co2_price,
        "objective_by_sector": d.objective_by_sector,
        "owners": {k: asdict(o) for k, o in d.owners.items()},
        "series": d.series,
        "nodal_prices": d.nodal_prices,
    }


def _dispatch_from_dict(d: dict | None) -> DispatchSolution | None:
    if d is None:
        return None
    return DispatchSolution(
        status=d["status"],
        objective=float(d["objective"]),
        n_steps=int(d["n_steps"]),
        step_hours=float(d["step_hours"]),
        series={o: {r: _arr(v) for r, v in roles.items()} for o, roles in d["series"].items()},
        owners={k: Owner(**o) for k, o in d["owners"].items()},
        objective_by_sector={k: float(v) for k, v in d["objective_by_sector"].items()},
        co2_emissions=float(d["co2_emissions"]),
        co2_price=float(d["co2_price"]),
        nodal_prices={k: _arr(v) for k, v in d["nodal_prices"].items()},
    )


def solution_to_dict(sol: PathwaySolution) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "mode": sol.mode,
        "method": sol.method,
        "costs": sol.costs,
        "status": sol.status,
        "objective": sol.objective,
        "bound": sol.bound,
        "iterations": sol.iterations,
        "seconds": sol.seconds,
        "years": list(sol.years),
        "z": sol.z,
        "technology": sol.technology,
        "operating_cost": sol.operating_cost,
        "investment_cost": sol.investment_cost,
        "learning": sol.learning,
        "curves": sol.curves,
        "dispatch": [_dispatch_to_dict(d) for d in sol.dispatch],
    }
    return _plain(doc)


def solution_from_dict(doc: dict, log_obj=None) -> PathwaySolution:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ScenarioFormatError("solution.json", "/schema_version", f"expected {SCHEMA_VERSION}")
    curves = {}
    for tech, c in doc["curves"].items():
        curves[tech] = {k: (_arr(v) if k in ("y", "values") else v) for k, v in c.items()}
    return PathwaySolution(
        method=doc["method"],
        costs=doc["costs"],
        status=doc["status"],
        objective=float(doc["objective"]),
        bound=float(doc["bound"]),
        iterations=int(doc["iterations"]),
        years=tuple(int(y) for y in doc["years"]),
        z={k: _arr(v) for k, v in doc["z"].items()},
        technology={k: _arr(v) for k, v in doc["technology"].items()},
        operating_cost=_arr(doc["operating_cost"]),
        investment_cost=_arr(doc["investment_cost"]),
        dispatch=[_dispatch_from_dict(d) for d in doc["dispatch"]],
        learning={k: _arr(v) for k, v in doc["learning"].items()},
        seconds=float(doc["seconds"]),
        log=log_obj,
        mode=doc["mode"],
        curves=curves,
    )


def _write_table(path: Path, head: list, rows: list[list]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(head)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def save_solution(sol: PathwaySolution, out: str | Path) -> list[Path]:
    """Write the solution artifacts into directory ``out``; returns the paths.

    investments.csv is GW added per technology and horizon, costs.csv is
    bn EUR per horizon, flows.csv holds yearly energy totals (MWh/a).
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    years = [str(y) for y in sol.years]
    written = []

    p = out / "solution.json"
    p.write_text(json.dumps(solution_to_dict(sol), indent=1) + "\n", encoding="utf-8")
    written.append(p)

    p = out / "investments.csv"
    rows = [[tech] + [v / 1000.0 for v in mw] + [float(mw.sum()) / 1000.0] for tech, mw in sol.technology.items()]
    _write_table(p, ["technology"] + years + ["Total"], rows)
    written.append(p)

    p = out / "costs.csv"
    rows = []
    for name, v in (("Operating", sol.operating_cost), ("Investment", sol.investment_cost), ("Total", sol.total_cost)):
        rows.append([name] + [float(x) / BN_EUR for x in v] + [float(v.sum()) / BN_EUR])
    _write_table(p, ["cost"] + years + ["Total"], rows)
    written.append(p)

    p = out / "flows.csv"
    rows = []
    for y, d in zip(sol.years, sol.dispatch):
        if d is None:
            continue
        for f in flow_summary(d, annualize=True):
            rows.append([y, f.kind, f.name, f.from_sector, f.to_sector, f.energy_in, f.energy_out])
    _write_table(p, ["year", "kind", "name", "from_sector", "to_sector", "energy_in_MWh", "energy_out_MWh"], rows)
    written.append(p)

    if isinstance(sol.log, BendersLog):
        p = out / "benders_log.csv"
        sol.log.to_csv(p)
        written.append(p)
    return written


def load_solution(directory: str | Path) -> PathwaySolution:
    """Read ``solution.json`` (and ``benders_log.csv`` when present)."""
    directory = Path(directory)
    path = directory / "solution.json"
    if not path.is_file():
        raise ScenarioFormatError(str(path), "", "solution file not found")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(path.name, "", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    log_path = directory / "benders_log.csv"
    log_obj = BendersLog.read_csv(log_path) if log_path.is_file() else None
    return solution_from_dict(doc, log_obj)


def solutions_equal(a: PathwaySolution, b: PathwaySolution) -> bool:
    """Structural equality of the saved content (cuts and timings of the log excluded)."""
    if solution_to_dict(a) != solution_to_dict(b):
        return False
    la, lb = a.log, b.log
    if (la is None) != (lb is None):
        return False
    if la is None:
        return True
    return (
        list(la.z_names) == list(lb.z_names)
        and np.array_equal(la.lower_bounds, lb.lower_bounds)
        and np.array_equal(la.upper_bounds, lb.upper_bounds)
    )


# --- bundled data -----------------------------------------------------------


def data_path(name: str) -> Path:
    return Path(str(resources.files("lisa") / "data" / name))


def builtin_test_system(hours: int | None = None) -> Scenario:
    """The bundled five-region system (8760 h of synthetic profiles).

    ``hours`` truncates the profiles to the first ``hours`` steps.
    """
    s = load_scenario(data_path("test_system.json"))
    return s.truncated(hours) if hours is not None else s


def micro_scenario(hours: int = 24) -> Scenario:
    """The bundled system over a short horizon, as used by the desk-scale checks."""
    return builtin_test_system(hours)


def resolve_scenario(ref: str | Path) -> Scenario:
    """Load a file path, or ``builtin:test_system`` / ``builtin:micro``."""
    ref = str(ref)
    if ref == "builtin:test_system":
        return builtin_test_system()
    if ref == "builtin:micro":
        return micro_scenario()
    return load_scenario(ref)
