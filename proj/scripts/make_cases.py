#!/usr/bin/env python3
"""Regenerates data/case33.json and data/case69.json from the tables below.

Branch tables are the Baran-Wu 33-bus feeder and the 69-bus feeder of
Das (2008) / Baran-Wu (1989); impedances in ohm, loads in kW/kVAr at the
receiving bus.
"""
import json
import pathlib

CASE33_LINES = [
    (1, 2, 0.0922, 0.0470), (2, 3, 0.4930, 0.2511), (3, 4, 0.3660, 0.1864),
    (4, 5, 0.3811, 0.1941), (5, 6, 0.8190, 0.7070), (6, 7, 0.1872, 0.6188),
    (7, 8, 0.7114, 0.2351), (8, 9, 1.0300, 0.7400), (9, 10, 1.0440, 0.7400),
    (10, 11, 0.1966, 0.0650), (11, 12, 0.3744, 0.1238), (12, 13, 1.4680, 1.1550),
    (13, 14, 0.5416, 0.7129), (14, 15, 0.5910, 0.5260), (15, 16, 0.7463, 0.5450),
    (16, 17, 1.2890, 1.7210), (17, 18, 0.7320, 0.5740), (2, 19, 0.1640, 0.1565),
    (19, 20, 1.5042, 1.3554), (20, 21, 0.4095, 0.4784), (21, 22, 0.7089, 0.9373),
    (3, 23, 0.4512, 0.3083), (23, 24, 0.8980, 0.7091), (24, 25, 0.8960, 0.7011),
    (6, 26, 0.2030, 0.1034), (26, 27, 0.2842, 0.1447), (27, 28, 1.0590, 0.9337),
    (28, 29, 0.8042, 0.7006), (29, 30, 0.5075, 0.2585), (30, 31, 0.9744, 0.9630),
    (31, 32, 0.3105, 0.3619), (32, 33, 0.3410, 0.5302),
]
CASE33_LOADS = {
    2: (100, 60), 3: (90, 40), 4: (120, 80), 5: (60, 30), 6: (60, 20),
    7: (200, 100), 8: (200, 100), 9: (60, 20), 10: (60, 20), 11: (45, 30),
    12: (60, 35), 13: (60, 35), 14: (120, 80), 15: (60, 10), 16: (60, 20),
    17: (60, 20), 18: (90, 40), 19: (90, 40), 20: (90, 40), 21: (90, 40),
    22: (90, 40), 23: (90, 50), 24: (420, 200), 25: (420, 200), 26: (60, 25),
    27: (60, 25), 28: (60, 20), 29: (120, 70), 30: (200, 600), 31: (150, 70),
    32: (210, 100), 33: (60, 40),
}

# (from, to, r, x, p_kw, q_kvar) with the load sitting at `to`.
CASE69_BRANCHES = [
    (1, 2, 0.0005, 0.0012, 0, 0), (2, 3, 0.0005, 0.0012, 0, 0),
    (3, 4, 0.0015, 0.0036, 0, 0), (4, 5, 0.0251, 0.0294, 0, 0),
    (5, 6, 0.3660, 0.1864, 2.6, 2.2), (6, 7, 0.3811, 0.1941, 40.4, 30),
    (7, 8, 0.0922, 0.0470, 75, 54), (8, 9, 0.0493, 0.0251, 30, 22),
    (9, 10, 0.8190, 0.2707, 28, 19), (10, 11, 0.1872, 0.0619, 145, 104),
    (11, 12, 0.7114, 0.2351, 145, 104), (12, 13, 1.0300, 0.3400, 8, 5.5),
    (13, 14, 1.0440, 0.3450, 8, 5.5), (14, 15, 1.0580, 0.3496, 0, 0),
    (15, 16, 0.1966, 0.0650, 45.5, 30), (16, 17, 0.3744, 0.1238, 60, 35),
    (17, 18, 0.0047, 0.0016, 60, 35), (18, 19, 0.3276, 0.1083, 0, 0),
    (19, 20, 0.2106, 0.0690, 1, 0.6), (20, 21, 0.3416, 0.1129, 114, 81),
    (21, 22, 0.0140, 0.0046, 5, 3.5), (22, 23, 0.1591, 0.0526, 0, 0),
    (23, 24, 0.3463, 0.1145, 28, 20), (24, 25, 0.7488, 0.2475, 0, 0),
    (25, 26, 0.3089, 0.1021, 14, 10), (26, 27, 0.1732, 0.0572, 14, 10),
    (3, 28, 0.0044, 0.0108, 26, 18.6), (28, 29, 0.0640, 0.1565, 26, 18.6),
    (29, 30, 0.3978, 0.1315, 0, 0), (30, 31, 0.0702, 0.0232, 0, 0),
    (31, 32, 0.3510, 0.1160, 0, 0), (32, 33, 0.8390, 0.2816, 14, 10),
    (33, 34, 1.7080, 0.5646, 19.5, 14), (34, 35, 1.4740, 0.4873, 6, 4),
    (3, 36, 0.0044, 0.0108, 26, 18.55), (36, 37, 0.0640, 0.1565, 26, 18.55),
    (37, 38, 0.1053, 0.1230, 0, 0), (38, 39, 0.0304, 0.0355, 24, 17),
    (39, 40, 0.0018, 0.0021, 24, 17), (40, 41, 0.7283, 0.8509, 1.2, 1),
    (41, 42, 0.3100, 0.3623, 0, 0), (42, 43, 0.0410, 0.0478, 6, 4.3),
    (43, 44, 0.0092, 0.0116, 0, 0), (44, 45, 0.1089, 0.1373, 39.22, 26.3),
    (45, 46, 0.0009, 0.0012, 39.22, 26.3), (4, 47, 0.0034, 0.0084, 0, 0),
    (47, 48, 0.0851, 0.2083, 79, 56.4), (48, 49, 0.2898, 0.7091, 384.7, 274.5),
    (49, 50, 0.0822, 0.2011, 384.7, 274.5), (8, 51, 0.0928, 0.0473, 40.5, 28.3),
    (51, 52, 0.3319, 0.1114, 3.6, 2.7), (9, 53, 0.1740, 0.0886, 4.35, 3.5),
    (53, 54, 0.2030, 0.1034, 26.4, 19), (54, 55, 0.2842, 0.1447, 24, 17.2),
    (55, 56, 0.2813, 0.1433, 0, 0), (56, 57, 1.5900, 0.5337, 0, 0),
    (57, 58, 0.7837, 0.2630, 0, 0), (58, 59, 0.3042, 0.1006, 100, 72),
    (59, 60, 0.3861, 0.1172, 0, 0), (60, 61, 0.5075, 0.2585, 1244, 888),
    (61, 62, 0.0974, 0.0496, 32, 23), (62, 63, 0.1450, 0.0738, 0, 0),
    (63, 64, 0.7105, 0.3619, 227, 162), (64, 65, 1.0410, 0.5302, 59, 42),
    (11, 66, 0.2012, 0.0611, 18, 13), (66, 67, 0.0047, 0.0014, 18, 13),
    (12, 68, 0.7394, 0.2444, 28, 20), (68, 69, 0.0047, 0.0016, 28, 20),
]


def ibers(buses):
    return [{"kind": "IB-ER", "bus": b, "s_rating_mva": 2.0, "p_max_mw": 1.5} for b in buses]


def svc(bus):
    return {"kind": "SVC", "bus": bus, "q_min_mvar": -2.0, "q_max_mvar": 2.0}


def fnv1a64(text):
    h = 0xcbf29ce484222325
    for byte in text.encode():
        h ^= byte
        h = (h * 0x100000001b3) & 0xFFFFFFFFFFFFFFFF
    return "%016x" % h


def checksum(buses, lines):
    rows = ["B %d %.6f %.6f" % (b["id"], b["p_load_mw"], b["q_load_mvar"]) for b in buses]
    rows += ["L %d %d %.6f %.6f" % (l["from"], l["to"], l["r"], l["x"]) for l in lines]
    return fnv1a64("\n".join(rows))


def build(name, n_bus, lines, loads, devices, subareas, source):
    buses = []
    for i in range(1, n_bus + 1):
        p, q = loads.get(i, (0.0, 0.0))
        buses.append({"id": i, "p_load_mw": round(p / 1000.0, 8), "q_load_mvar": round(q / 1000.0, 8)})
    line_objs = [{"from": f, "to": t, "r": r, "x": x} for f, t, r, x in lines]
    return {
        "name": name,
        "source": source,
        "checksum": checksum(buses, line_objs),
        "base_mva": 10.0,
        "base_kv": 12.66,
        "units": "ohm",
        "slack_bus": 1,
        "buses": buses,
        "lines": line_objs,
        "devices": devices,
        "subareas": subareas,
    }


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data"
    case33 = build("case33", 33, CASE33_LINES, CASE33_LOADS,
                   ibers([18, 22, 25]) + [svc(33)],
                   [list(range(7, 19)), [19, 20, 21, 22], [23, 24, 25], list(range(26, 34))],
                   "Baran & Wu 1989, 33-bus radial feeder")
    loads69 = {t: (p, q) for _, t, _, _, p, q in CASE69_BRANCHES}
    case69 = build("case69", 69, [b[:4] for b in CASE69_BRANCHES], loads69,
                   ibers([6, 24, 45, 58]) + [svc(14)],
                   [list(range(2, 11)), list(range(11, 27)), list(range(36, 46)), list(range(53, 65))],
                   "Das 2008 / Baran & Wu 1989, 69-bus radial feeder")
    for case in (case33, case69):
        (out / (case["name"] + ".json")).write_text(json.dumps(case, indent=1) + "\n")


if __name__ == "__main__":
    main()
