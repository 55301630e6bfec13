"""Case file ingestion and export (self-contained JSON schema)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import (
    Branch, Bus, CaseValidationError, Generator, GridCase, freeze_series,
    validate_case,
)


class CaseParseError(ValueError):
    """Malformed case file; message carries the offending location/field."""


_BUS_KEYS = {"id", "base_kv", "zone", "coord", "load_profile_ref"}
_BRANCH_KEYS = {"id", "from_bus", "to_bus", "susceptance", "flow_limit", "status"}
_GEN_KEYS = {
    "id", "bus", "pmin", "pmax", "ramp_up", "ramp_down", "min_up", "min_down",
    "cost_quad", "no_load_cost", "startup_cost", "shutdown_cost",
    "renewable_profile_ref",
}
_TOP_KEYS = {"base_mva", "slack_bus", "buses", "branches", "generators", "series"}


def _reject_unknown(record: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(record) - allowed)
    if unknown:
        raise CaseParseError(f"{where}: unknown keys {unknown}")


def _require(record: dict, key: str, where: str):
    if key not in record:
        raise CaseParseError(f"{where}: missing required key {key!r}")
    return record[key]


def _parse_bus(rec: dict, where: str) -> Bus:
    _reject_unknown(rec, _BUS_KEYS, where)
    coord = rec.get("coord")
    if coord is not None:
        if not (isinstance(coord, (list, tuple)) and len(coord) == 2):
            raise CaseParseError(f"{where}: coord must be [lon, lat]")
        coord = (float(coord[0]), float(coord[1]))
    return Bus(
        id=int(_require(rec, "id", where)),
        base_kv=float(_require(rec, "base_kv", where)),
        zone=str(rec.get("zone", "")),
        coord=coord,
        load_profile_ref=rec.get("load_profile_ref"),
    )


def _parse_branch(rec: dict, where: str) -> Branch:
    _reject_unknown(rec, _BRANCH_KEYS, where)
    return Branch(
        id=int(_require(rec, "id", where)),
        from_bus=int(_require(rec, "from_bus", where)),
        to_bus=int(_require(rec, "to_bus", where)),
        susceptance=float(_require(rec, "susceptance", where)),
        flow_limit=float(_require(rec, "flow_limit", where)),
        status=str(rec.get("status", "in")),
    )


def _parse_generator(rec: dict, where: str) -> Generator:
    _reject_unknown(rec, _GEN_KEYS, where)
    pmax = float(_require(rec, "pmax", where))
    cq = rec.get("cost_quad", [0.0, 0.0, 0.0])
    if not (isinstance(cq, (list, tuple)) and len(cq) == 3):
        raise CaseParseError(f"{where}: cost_quad must be [c2, c1, c0]")
    return Generator(
        id=int(_require(rec, "id", where)),
        bus=int(_require(rec, "bus", where)),
        pmin=float(rec.get("pmin", 0.0)),
        pmax=pmax,
        ramp_up=float(rec.get("ramp_up", pmax)),
        ramp_down=float(rec.get("ramp_down", pmax)),
        min_up=int(rec.get("min_up", 1)),
        min_down=int(rec.get("min_down", 1)),
        cost_quad=(float(cq[0]), float(cq[1]), float(cq[2])),
        no_load_cost=float(rec.get("no_load_cost", 0.0)),
        startup_cost=float(rec.get("startup_cost", 0.0)),
        shutdown_cost=float(rec.get("shutdown_cost", 0.0)),
        renewable_profile_ref=rec.get("renewable_profile_ref"),
    )


def case_from_dict(doc: dict) -> GridCase:
    """Build and validate a GridCase from the documented JSON structure."""
    if not isinstance(doc, dict):
        raise CaseParseError("case document must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "top level")
    for key in ("base_mva", "slack_bus", "buses", "branches", "generators"):
        _require(doc, key, "top level")

    buses = tuple(_parse_bus(rec, f"buses[{k}]")
                  for k, rec in enumerate(doc["buses"]))
    branches = tuple(_parse_branch(rec, f"branches[{k}]")
                     for k, rec in enumerate(doc["branches"]))
    gens = tuple(_parse_generator(rec, f"generators[{k}]")
                 for k, rec in enumerate(doc["generators"]))
    series_doc = doc.get("series", {})
    if not isinstance(series_doc, dict):
        raise CaseParseError("series must be an object of name -> hourly values")
    series = {}
    for name, values in series_doc.items():
        try:
            series[name] = np.asarray(values, dtype=float)
        except (TypeError, ValueError):
            raise CaseParseError(f"series[{name!r}]: values must be numeric") from None

    case = GridCase(
        base_mva=float(doc["base_mva"]),
        slack_bus=int(doc["slack_bus"]),
        buses=buses,
        branches=branches,
        generators=gens,
        series=freeze_series(series),
    )
    validate_case(case)
    return case


def load_case(path: str | Path) -> GridCase:
    """Load and validate a JSON case file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise CaseParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise CaseParseError(f"{path}:{exc.lineno}: {exc.msg}") from None
    return case_from_dict(doc)


def case_to_dict(case: GridCase) -> dict:
    def bus_rec(b: Bus) -> dict:
        rec: dict = {"id": b.id, "base_kv": b.base_kv, "zone": b.zone}
        if b.coord is not None:
            rec["coord"] = [b.coord[0], b.coord[1]]
        if b.load_profile_ref is not None:
            rec["load_profile_ref"] = b.load_profile_ref
        return rec

    def gen_rec(g: Generator) -> dict:
        rec: dict = {
            "id": g.id, "bus": g.bus, "pmin": g.pmin, "pmax": g.pmax,
            "ramp_up": g.ramp_up, "ramp_down": g.ramp_down,
            "min_up": g.min_up, "min_down": g.min_down,
            "cost_quad": list(g.cost_quad), "no_load_cost": g.no_load_cost,
            "startup_cost": g.startup_cost, "shutdown_cost": g.shutdown_cost,
        }
        if g.renewable_profile_ref is not None:
            rec["renewable_profile_ref"] = g.renewable_profile_ref
        return rec

    return {
        "base_mva": case.base_mva,
        "slack_bus": case.slack_bus,
        "buses": [bus_rec(b) for b in case.buses],
        "branches": [
            {"id": br.id, "from_bus": br.from_bus, "to_bus": br.to_bus,
             "susceptance": br.susceptance, "flow_limit": br.flow_limit,
             "status": br.status}
            for br in case.branches
        ],
        "generators": [gen_rec(g) for g in case.generators],
        "series": {name: [float(v) for v in arr]
                   for name, arr in sorted(case.series.items())},
    }


def write_case(case: GridCase, path: str | Path) -> None:
    Path(path).write_text(json.dumps(case_to_dict(case), indent=1) + "\n")
