#!/usr/bin/env python3
"""Regenerate data/rts24.json from the tables below.

Branch reactances and unit nameplates are the published IEEE RTS-24 (1979)
values as distributed in MATPOWER's case24_ieee_rts. Inertia constants and
governor droops are not part of the RTS publication; the per-technology
values used here are typical textbook figures and are documented as
assumptions inside the generated file.
"""
import json
import pathlib

# (from, to, x_pu on 100 MVA)
BRANCHES = [
    (1, 2, 0.0139), (1, 3, 0.2112), (1, 5, 0.0845), (2, 4, 0.1267),
    (2, 6, 0.1920), (3, 9, 0.1190), (3, 24, 0.0839), (4, 9, 0.1037),
    (5, 10, 0.0883), (6, 10, 0.0605), (7, 8, 0.0614), (8, 9, 0.1651),
    (8, 10, 0.1651), (9, 11, 0.0839), (9, 12, 0.0839), (10, 11, 0.0839),
    (10, 12, 0.0839), (11, 13, 0.0476), (11, 14, 0.0418), (12, 13, 0.0476),
    (12, 23, 0.0966), (13, 23, 0.0865), (14, 16, 0.0389), (15, 16, 0.0173),
    (15, 21, 0.0490), (15, 21, 0.0490), (15, 24, 0.0519), (16, 17, 0.0259),
    (16, 19, 0.0231), (17, 18, 0.0144), (17, 22, 0.1053), (18, 21, 0.0259),
    (18, 21, 0.0259), (19, 20, 0.0396), (19, 20, 0.0396), (20, 23, 0.0216),
    (20, 23, 0.0216), (21, 22, 0.0678),
]

# unit type -> (nameplate MVA, assumed H in s on machine base, droop-based d on machine base)
UNIT = {
    "U12": (12.0, 2.5, 20.0),
    "U20": (20.0, 3.0, 20.0),
    "U50": (50.0, 3.0, 20.0),
    "U76": (76.0, 3.5, 20.0),
    "U100": (100.0, 3.5, 20.0),
    "U155": (155.0, 4.0, 20.0),
    "U197": (197.0, 4.0, 20.0),
    "U350": (350.0, 4.5, 20.0),
    "U400": (400.0, 5.0, 20.0),
    "SC200": (200.0, 1.5, 1.0),
}

UNITS_AT_BUS = {
    1: ["U20", "U20", "U76", "U76"],
    2: ["U20", "U20", "U76", "U76"],
    7: ["U100", "U100", "U100"],
    13: ["U197", "U197", "U197"],
    14: ["SC200"],
    15: ["U12"] * 5 + ["U155"],
    16: ["U155"],
    18: ["U400"],
    21: ["U400"],
    22: ["U50"] * 6,
    23: ["U155", "U155", "U350"],
}

# RTS-24 bus peak loads in MW; the system-wide load step is spread in proportion.
PEAK_LOAD_MW = {
    1: 108, 2: 97, 3: 180, 4: 74, 5: 71, 6: 136, 7: 125, 8: 171, 9: 175, 10: 195,
    13: 265, 14: 194, 15: 317, 16: 100, 18: 333, 19: 181, 20: 128,
}
LOAD_STEP_MW = 150.0

BASE_X_MVA = 100.0


def main():
    generators = []
    for bus, units in sorted(UNITS_AT_BUS.items()):
        for u in units:
            s, h, d = UNIT[u]
            generators.append({"bus": bus, "h_s": h, "s_mva": s, "d_pu": d})
    base_mva = sum(g["s_mva"] for g in generators)

    branches = []
    seen = {}
    for f, t, x in BRANCHES:
        key = (min(f, t), max(f, t))
        seen[key] = seen.get(key, 0) + 1
        br = {"from": f, "to": t, "b_pu": round(BASE_X_MVA / base_mva / x, 12)}
        if seen[key] > 1:
            br["ckt"] = seen[key]
        branches.append(br)

    buses = [{"id": i, "kind": "generator" if i in UNITS_AT_BUS else "passive"}
             for i in range(1, 25)]

    total_load = float(sum(PEAK_LOAD_MW.values()))
    vi = [{"bus": b, "m_min_s": 0.0, "m_max_s": 3.0, "d_vi_pu": 0.5}
          for b in sorted(UNITS_AT_BUS)]

    case = {
        "provenance": {
            "network": "IEEE RTS-24 (1979) branch reactances, MATPOWER case24_ieee_rts; "
                       "b_pu = 1/x rescaled from the 100 MVA base to base_mva; "
                       "resistance, charging and tap ratios are dropped",
            "system": "base_mva is the sum of unit nameplates (33 units incl. the bus-14 "
                      "synchronous condenser rated 200 MVA); nominal 60 Hz",
            "generators": "unit nameplates from the RTS unit table; h_s are assumed typical "
                          "values by technology; d_pu is a 5 % droop (20 p.u. on machine base), "
                          "1 p.u. mechanical damping for the synchronous condenser",
            "buses": "voltage magnitudes omitted (unit voltages)",
            "vi_candidates": "one candidate per generator bus, 0..3 s of virtual inertia "
                             "on the system base, 0.5 p.u. virtual damping each",
            "disturbances": "150 MW total load increase at t = 1 s, spread over the load buses "
                            "in proportion to the RTS peak bus loads (2850 MW total)",
            "generator": "data/make_rts24.py",
        },
        "system": {"base_mva": base_mva, "nominal_hz": 60.0},
        "buses": buses,
        "branches": branches,
        "generators": generators,
        "vi_candidates": vi,
        "disturbances": [
            {"bus": b, "dp_pu": round(-LOAD_STEP_MW * mw / total_load / base_mva, 12), "t_start_s": 1.0}
            for b, mw in sorted(PEAK_LOAD_MW.items())
        ],
    }
    out = pathlib.Path(__file__).with_name("rts24.json")
    out.write_text(json.dumps(case, indent=2) + "\n")
    print(f"wrote {out}: {len(buses)} buses, {len(branches)} branches, "
          f"{len(generators)} generators, base {base_mva} MVA")


if __name__ == "__main__":
    main()
