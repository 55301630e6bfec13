"""Converter from MATPOWER-style tabular case text to the JSON case schema."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .caseio import CaseParseError, case_from_dict

_MATRIX_RE = re.compile(r"mpc\.(\w+)\s*=\s*\[(.*?)\];", re.DOTALL)
_SCALAR_RE = re.compile(r"mpc\.(\w+)\s*=\s*([0-9eE.+-]+)\s*;")

# column positions (0-based) in the standard MATPOWER tables
_BUS_I, _BUS_TYPE, _PD, _BASE_KV, _ZONE = 0, 1, 2, 9, 10
_GEN_BUS, _GEN_STATUS, _PMAX, _PMIN, _RAMP_30 = 0, 7, 8, 9, 18
_F_BUS, _T_BUS, _BR_X, _RATE_A, _TAP, _BR_STATUS = 0, 1, 3, 5, 8, 10

_UNLIMITED_MW = 1e5


def _strip_comments(text: str) -> str:
    return "\n".join(line.split("%", 1)[0] for line in text.splitlines())


def _parse_matrix(body: str, name: str) -> np.ndarray:
    rows = []
    width = None
    for lineno, chunk in enumerate(body.replace("\n", ";").split(";")):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            row = [float(tok) for tok in chunk.split()]
        except ValueError:
            raise CaseParseError(
                f"mpc.{name} row {lineno}: non-numeric entry in {chunk!r}") from None
        if width is None:
            width = len(row)
        if len(row) != width:
            raise CaseParseError(
                f"mpc.{name} row {lineno}: expected {width} columns, got {len(row)}")
        rows.append(row)
    if not rows:
        raise CaseParseError(f"mpc.{name}: empty matrix")
    return np.array(rows)


def parse_matpower(text: str) -> dict[str, np.ndarray | float]:
    """Extract baseMVA plus the bus/gen/branch/gencost tables."""
    clean = _strip_comments(text)
    tables: dict[str, np.ndarray | float] = {}
    for m in _SCALAR_RE.finditer(clean):
        tables[m.group(1)] = float(m.group(2))
    for m in _MATRIX_RE.finditer(clean):
        tables[m.group(1)] = _parse_matrix(m.group(2), m.group(1))
    for required in ("baseMVA", "bus", "gen", "branch"):
        if required not in tables:
            raise CaseParseError(f"missing mpc.{required} block")
    return tables


def _poly_cost(row: np.ndarray) -> tuple[float, float, float]:
    model, ncost = int(row[0]), int(row[3])
    if model != 2:
        raise CaseParseError(
            "only polynomial gencost (MODEL=2) is supported; found "
            f"MODEL={model}")
    coeffs = row[4:4 + ncost]
    if ncost >= 3:
        return float(coeffs[-3]), float(coeffs[-2]), float(coeffs[-1])
    if ncost == 2:
        return 0.0, float(coeffs[0]), float(coeffs[1])
    if ncost == 1:
        return 0.0, 0.0, float(coeffs[0])
    raise CaseParseError(f"gencost with NCOST={ncost} is not supported")


def matpower_to_case_dict(text: str, horizon: int = 24) -> dict:
    """MATPOWER text -> case dict; static Pd becomes a flat hourly series.

    MATPOWER carries no chronology, so each nonzero bus load is expanded to a
    constant series of `horizon` hours (must be a multiple of 24).
    """
    if horizon % 24 != 0 or horizon <= 0:
        raise CaseParseError("horizon must be a positive multiple of 24")
    tables = parse_matpower(text)
    bus = tables["bus"]
    gen = tables["gen"]
    branch = tables["branch"]
    gencost = tables.get("gencost")

    slack_rows = np.flatnonzero(bus[:, _BUS_TYPE] == 3)
    if slack_rows.size == 0:
        raise CaseParseError("no slack bus (BUS_TYPE == 3) in mpc.bus")

    series: dict[str, list[float]] = {}
    buses = []
    for row in bus:
        bus_id = int(row[_BUS_I])
        rec: dict = {
            "id": bus_id,
            "base_kv": float(row[_BASE_KV]),
            "zone": str(int(row[_ZONE])) if bus.shape[1] > _ZONE else "",
        }
        pd = float(row[_PD])
        if pd != 0.0:
            ref = f"load_{bus_id}"
            series[ref] = [pd] * horizon
            rec["load_profile_ref"] = ref
        buses.append(rec)

    branches = []
    for k, row in enumerate(branch):
        status = int(row[_BR_STATUS]) if branch.shape[1] > _BR_STATUS else 1
        x = float(row[_BR_X])
        if x == 0.0:
            raise CaseParseError(f"branch row {k}: zero reactance")
        tap = float(row[_TAP]) if branch.shape[1] > _TAP else 0.0
        rate = float(row[_RATE_A])
        branches.append({
            "id": k + 1,
            "from_bus": int(row[_F_BUS]),
            "to_bus": int(row[_T_BUS]),
            "susceptance": 1.0 / (x * (tap if tap > 0 else 1.0)),
            "flow_limit": rate if rate > 0 else _UNLIMITED_MW,
            "status": "in" if status else "out",
        })

    gens = []
    for k, row in enumerate(gen):
        if int(row[_GEN_STATUS]) <= 0:
            continue
        pmax = float(row[_PMAX])
        ramp30 = float(row[_RAMP_30]) if gen.shape[1] > _RAMP_30 else 0.0
        ramp = 2.0 * ramp30 if ramp30 > 0 else pmax
        rec: dict = {
            "id": k + 1,
            "bus": int(row[_GEN_BUS]),
            "pmin": max(0.0, float(row[_PMIN])),
            "pmax": pmax,
            "ramp_up": ramp,
            "ramp_down": ramp,
        }
        if gencost is not None and k < gencost.shape[0]:
            c2, c1, c0 = _poly_cost(gencost[k])
            rec["cost_quad"] = [c2, c1, c0]
            rec["startup_cost"] = float(gencost[k][1])
            rec["shutdown_cost"] = float(gencost[k][2])
        gens.append(rec)

    return {
        "base_mva": float(tables["baseMVA"]),
        "slack_bus": int(bus[slack_rows[0], _BUS_I]),
        "buses": buses,
        "branches": branches,
        "generators": gens,
        "series": series,
    }


def convert_matpower_file(src: str | Path, dst: str | Path,
                          horizon: int = 24) -> None:
    import json

    doc = matpower_to_case_dict(Path(src).read_text(), horizon=horizon)
    case_from_dict(doc)  # validate before writing
    Path(dst).write_text(json.dumps(doc, indent=1) + "\n")
