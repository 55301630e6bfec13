#!/usr/bin/env python3
"""Regenerate the bundled study cases (deterministic).

case3: equal-susceptance triangle used by hand-derived PTDF checks.
case5: small meshed system with a pendant branch, for property tests.
case14: the congested screening fixture: a generation-rich, low-price west
pocket exports through a limited interface into meshed north/east load hubs,
so the historically cheapest buses sit behind binding corridors.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "gridsiter" / "cases"

LOAD_SHAPE = [0.62, 0.58, 0.55, 0.54, 0.55, 0.58, 0.65, 0.72, 0.78, 0.82,
              0.85, 0.87, 0.88, 0.89, 0.91, 0.95, 1.00, 0.99, 0.97, 0.90,
              0.84, 0.76, 0.70, 0.65]
DAY_LOAD = [0.95, 0.99, 1.03, 0.97, 1.06, 0.92, 1.00]

WIND_SHAPE = [0.90, 0.95, 1.00, 0.95, 0.90, 0.80, 0.70, 0.55, 0.45, 0.40,
              0.35, 0.30, 0.30, 0.35, 0.35, 0.40, 0.35, 0.30, 0.40, 0.50,
              0.60, 0.70, 0.80, 0.85]
DAY_WIND = [0.50, 0.90, 0.70, 1.00, 0.30, 0.80, 0.60]

SOLAR_SHAPE = [0, 0, 0, 0, 0, 0, 0.05, 0.20, 0.45, 0.65, 0.82, 0.93, 1.00,
               0.98, 0.90, 0.75, 0.55, 0.35, 0.15, 0.03, 0, 0, 0, 0]
DAY_SOLAR = [1.00, 0.70, 0.90, 1.00, 0.60, 0.95, 0.85]


def series(shape, day_factors, scale, ndays):
    out = []
    for d in range(ndays):
        out.extend(round(scale * day_factors[d % len(day_factors)] * s, 3)
                   for s in shape)
    return out


def case3():
    ndays = 1
    return {
        "base_mva": 100.0,
        "slack_bus": 3,
        "buses": [
            {"id": 1, "base_kv": 115.0, "zone": "A", "coord": [-97.5, 31.0]},
            {"id": 2, "base_kv": 115.0, "zone": "A", "coord": [-97.2, 31.2],
             "load_profile_ref": "load_2"},
            {"id": 3, "base_kv": 115.0, "zone": "B", "coord": [-97.0, 30.8],
             "load_profile_ref": "load_3"},
        ],
        "branches": [
            {"id": 1, "from_bus": 1, "to_bus": 2, "susceptance": 1.0,
             "flow_limit": 120.0, "status": "in"},
            {"id": 2, "from_bus": 1, "to_bus": 3, "susceptance": 1.0,
             "flow_limit": 120.0, "status": "in"},
            {"id": 3, "from_bus": 2, "to_bus": 3, "susceptance": 1.0,
             "flow_limit": 120.0, "status": "in"},
        ],
        "generators": [
            {"id": 1, "bus": 1, "pmin": 0.0, "pmax": 250.0, "ramp_up": 250.0,
             "ramp_down": 250.0, "min_up": 1, "min_down": 1,
             "cost_quad": [0.0, 18.0, 0.0]},
            {"id": 2, "bus": 3, "pmin": 0.0, "pmax": 150.0, "ramp_up": 150.0,
             "ramp_down": 150.0, "min_up": 1, "min_down": 1,
             "cost_quad": [0.0, 35.0, 0.0]},
        ],
        "series": {
            "load_2": series(LOAD_SHAPE, [1.0], 90.0, ndays),
            "load_3": series(LOAD_SHAPE, [1.0], 70.0, ndays),
        },
    }


def case5():
    ndays = 2
    return {
        "base_mva": 100.0,
        "slack_bus": 1,
        "buses": [
            {"id": 1, "base_kv": 230.0, "zone": "W", "coord": [-99.0, 31.5]},
            {"id": 2, "base_kv": 230.0, "zone": "W", "coord": [-98.6, 31.7],
             "load_profile_ref": "load_2"},
            {"id": 3, "base_kv": 230.0, "zone": "E", "coord": [-98.2, 31.4],
             "load_profile_ref": "load_3"},
            {"id": 4, "base_kv": 230.0, "zone": "E", "coord": [-98.0, 31.8],
             "load_profile_ref": "load_4"},
            {"id": 5, "base_kv": 115.0, "zone": "E", "coord": [-97.8, 31.6],
             "load_profile_ref": "load_5"},
        ],
        "branches": [
            {"id": 1, "from_bus": 1, "to_bus": 2, "susceptance": 12.0,
             "flow_limit": 250.0, "status": "in"},
            {"id": 2, "from_bus": 1, "to_bus": 3, "susceptance": 10.0,
             "flow_limit": 220.0, "status": "in"},
            {"id": 3, "from_bus": 2, "to_bus": 3, "susceptance": 8.0,
             "flow_limit": 150.0, "status": "in"},
            {"id": 4, "from_bus": 2, "to_bus": 4, "susceptance": 9.0,
             "flow_limit": 180.0, "status": "in"},
            {"id": 5, "from_bus": 3, "to_bus": 4, "susceptance": 9.0,
             "flow_limit": 180.0, "status": "in"},
            {"id": 6, "from_bus": 4, "to_bus": 5, "susceptance": 14.0,
             "flow_limit": 140.0, "status": "in"},
        ],
        "generators": [
            {"id": 1, "bus": 1, "pmin": 50.0, "pmax": 350.0, "ramp_up": 160.0,
             "ramp_down": 160.0, "min_up": 2, "min_down": 2,
             "cost_quad": [0.003, 17.0, 50.0], "no_load_cost": 150.0,
             "startup_cost": 350.0, "shutdown_cost": 80.0},
            {"id": 2, "bus": 3, "pmin": 0.0, "pmax": 200.0, "ramp_up": 200.0,
             "ramp_down": 200.0, "min_up": 1, "min_down": 1,
             "cost_quad": [0.005, 26.0, 0.0]},
            {"id": 3, "bus": 4, "pmin": 0.0, "pmax": 120.0, "ramp_up": 120.0,
             "ramp_down": 120.0, "min_up": 1, "min_down": 1,
             "cost_quad": [0.0, 55.0, 0.0]},
        ],
        "series": {
            "load_2": series(LOAD_SHAPE, DAY_LOAD, 110.0, ndays),
            "load_3": series(LOAD_SHAPE, DAY_LOAD, 120.0, ndays),
            "load_4": series(LOAD_SHAPE, DAY_LOAD, 100.0, ndays),
            "load_5": series(LOAD_SHAPE, DAY_LOAD, 60.0, ndays),
        },
    }


def case14():
    ndays = 7
    buses = [
        (1, 230.0, "W", [-102.3, 31.9], 0),
        (2, 230.0, "W", [-102.0, 32.3], 0),
        (3, 115.0, "W", [-102.6, 31.5], 40),
        (4, 115.0, "W", [-101.8, 31.3], 35),
        (5, 230.0, "N", [-99.5, 32.6], 0),
        (6, 230.0, "N", [-98.4, 32.8], 110),
        (7, 115.0, "N", [-98.0, 33.2], 95),
        (8, 115.0, "N", [-97.6, 32.9], 85),
        (9, 230.0, "E", [-96.8, 32.1], 115),
        (10, 115.0, "E", [-96.4, 32.4], 80),
        (11, 115.0, "E", [-96.2, 31.8], 75),
        (12, 115.0, "S", [-97.1, 31.2], 65),
        (13, 13.8, "E", [-96.9, 32.0], 0),
        (14, 500.0, "N", [-100.8, 32.4], 0),
    ]
    branch_data = [
        # west pocket
        (1, 1, 2, 20.0, 400.0),
        (2, 1, 3, 12.0, 150.0),
        (3, 2, 4, 12.0, 150.0),
        (4, 3, 4, 10.0, 120.0),
        # west -> north interface (the scarce corridor)
        (5, 1, 14, 25.0, 280.0),
        (6, 14, 5, 25.0, 280.0),
        (7, 2, 5, 8.0, 120.0),
        # north mesh
        (8, 5, 6, 15.0, 250.0),
        (9, 6, 7, 10.0, 160.0),
        (10, 6, 8, 10.0, 160.0),
        (11, 7, 8, 8.0, 100.0),
        (12, 5, 7, 8.0, 140.0),
        # north -> east
        (13, 6, 9, 12.0, 200.0),
        (14, 5, 9, 10.0, 180.0),
        # east / south mesh
        (15, 9, 10, 10.0, 230.0),
        (16, 9, 11, 10.0, 210.0),
        (17, 10, 11, 6.0, 150.0),
        (18, 9, 12, 8.0, 200.0),
        (19, 11, 12, 6.0, 150.0),
        # generator terminal (pendant: excluded from the N-1 library)
        (20, 13, 9, 15.0, 200.0),
    ]
    gens = [
        {"id": 1, "bus": 1, "pmin": 80.0, "pmax": 400.0, "ramp_up": 150.0,
         "ramp_down": 150.0, "min_up": 2, "min_down": 2,
         "cost_quad": [0.004, 16.0, 120.0], "no_load_cost": 250.0,
         "startup_cost": 400.0, "shutdown_cost": 100.0},
        {"id": 2, "bus": 2, "pmin": 0.0, "pmax": 180.0, "ramp_up": 180.0,
         "ramp_down": 180.0, "min_up": 1, "min_down": 1,
         "cost_quad": [0.0, 1.0, 0.0], "renewable_profile_ref": "wind_w"},
        {"id": 3, "bus": 6, "pmin": 0.0, "pmax": 300.0, "ramp_up": 300.0,
         "ramp_down": 300.0, "min_up": 1, "min_down": 1,
         "cost_quad": [0.006, 24.0, 0.0]},
        {"id": 4, "bus": 9, "pmin": 0.0, "pmax": 280.0, "ramp_up": 280.0,
         "ramp_down": 280.0, "min_up": 1, "min_down": 1,
         "cost_quad": [0.005, 27.0, 0.0]},
        {"id": 5, "bus": 13, "pmin": 30.0, "pmax": 150.0, "ramp_up": 150.0,
         "ramp_down": 150.0, "min_up": 2, "min_down": 1,
         "cost_quad": [0.0, 45.0, 0.0], "no_load_cost": 80.0,
         "startup_cost": 300.0},
        {"id": 6, "bus": 7, "pmin": 0.0, "pmax": 100.0, "ramp_up": 100.0,
         "ramp_down": 100.0, "min_up": 1, "min_down": 1,
         "cost_quad": [0.0, 60.0, 0.0]},
        {"id": 7, "bus": 3, "pmin": 0.0, "pmax": 120.0, "ramp_up": 120.0,
         "ramp_down": 120.0, "min_up": 1, "min_down": 1,
         "cost_quad": [0.0, 0.5, 0.0], "renewable_profile_ref": "solar_w"},
    ]
    doc = {
        "base_mva": 100.0,
        "slack_bus": 1,
        "buses": [],
        "branches": [
            {"id": i, "from_bus": f, "to_bus": t, "susceptance": b,
             "flow_limit": lim, "status": "in"}
            for i, f, t, b, lim in branch_data
        ],
        "generators": gens,
        "series": {
            "wind_w": series(WIND_SHAPE, DAY_WIND, 170.0, ndays),
            "solar_w": series(SOLAR_SHAPE, DAY_SOLAR, 115.0, ndays),
        },
    }
    for bus_id, kv, zone, coord, peak in buses:
        rec = {"id": bus_id, "base_kv": kv, "zone": zone, "coord": coord}
        if peak:
            ref = f"load_{bus_id}"
            rec["load_profile_ref"] = ref
            doc["series"][ref] = series(LOAD_SHAPE, DAY_LOAD, float(peak), ndays)
        doc["buses"].append(rec)
    return doc


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in (("case3", case3()), ("case5", case5()),
                      ("case14", case14())):
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        print("wrote", path)


if __name__ == "__main__":
    main()
