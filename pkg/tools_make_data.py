"""One-shot generator for the packaged instance and solution fixture files.

Run from the repo root: python3 tools_make_data.py
"""
import json
import os

OUT = os.path.join("src", "uchybrid", "data")

# Columns: p_min, p_max, a, b, c, hot, cold, cold_time, t_down, t_up, ramp_down, ramp_up
# The ramp columns below are already the corrected (swapped) values for the
# instances whose published solutions pin the other row; see the decisions ledger.

UC_4A_UNITS = [
    # printed ramps were r_dn=(10,40,20,100), r_up=(5,30,15,90) -> swapped
    (10, 55, 670, 25.92, 0.00413, 10, 12, 1, 4, 1, 5, 10),
    (10, 100, 450, 16.5, 0.002, 15, 18, 2, 1, 1, 30, 40),
    (25, 85, 735, 16.7, 0.00398, 12, 13, 2, 1, 2, 15, 20),
    (150, 500, 370, 22.26, 0.00712, 9, 14, 1, 3, 23, 90, 100),
]
UC_4B_UNITS = [
    # ramps as printed (the published best-classical schedule is only
    # optimal under the printed orientation)
    (150, 455, 1000, 16.19, 0.00048, 9, 14, 2, 2, 3, 100, 80),
    (20, 130, 700, 16.5, 0.002, 12, 13, 1, 1, 2, 30, 15),
    (25, 165, 450, 16.7, 0.00398, 15, 18, 1, 1, 1, 40, 30),
    (20, 80, 370, 22.26, 0.00712, 10, 12, 2, 4, 1, 10, 5),
]
UC_10_UNITS = [
    # printed ramps were r_dn=(25,10,30,50,35,60,70,100,80,40),
    #                    r_up=(80,20,20,40,35,50,15,80,50,30) -> swapped
    (10, 55, 660, 25.92, 0.00413, 13, 15, 1, 2, 1, 80, 25),
    (10, 55, 670, 27.76, 0.00173, 8, 11, 2, 4, 3, 20, 10),
    (20, 130, 700, 16.6, 0.002, 12, 13, 3, 1, 2, 20, 30),
    (20, 130, 680, 16.5, 0.00211, 16, 20, 1, 3, 1, 40, 50),
    (25, 165, 450, 19.7, 0.00398, 10, 12, 2, 1, 1, 35, 35),
    (150, 455, 970, 17.26, 0.00031, 12, 15, 2, 2, 2, 50, 60),
    (25, 85, 480, 27.74, 0.0079, 17, 20, 1, 1, 1, 15, 70),
    (10, 55, 665, 27.27, 0.00222, 12, 14, 2, 2, 4, 80, 100),
    (150, 455, 1000, 16.19, 0.00048, 7, 12, 1, 1, 1, 50, 80),
    (20, 80, 370, 22.26, 0.00712, 15, 18, 3, 3, 1, 30, 40),
]
UC_12A_EXTRA = [
    # units 11-12; printed r_dn=(40,80), r_up=(70,60) -> swapped
    (50, 185, 490, 18.5, 0.0074, 15, 18, 3, 2, 2, 70, 40),
    (120, 370, 735, 24.9, 0.00154, 9, 12, 1, 2, 3, 60, 80),
]
UC_12B_UNITS = [
    # ramps as printed (published solutions are tight at these values)
    (170, 355, 960, 20.4, 0.00287, 13, 15, 1, 2, 1, 75, 40),
    (20, 55, 470, 29.8, 0.00788, 8, 11, 2, 1, 2, 60, 30),
    (85, 400, 560, 28.5, 0.00646, 12, 13, 3, 3, 1, 40, 50),
    (155, 360, 400, 15.9, 0.00057, 16, 20, 1, 2, 2, 35, 70),
    (195, 430, 600, 27.9, 0.0026, 10, 12, 2, 1, 3, 85, 30),
    (200, 465, 1000, 17.2, 0.00584, 12, 15, 2, 1, 1, 70, 40),
    (100, 275, 900, 17.7, 0.00199, 17, 20, 1, 2, 2, 75, 70),
    (65, 305, 910, 27.3, 0.00454, 12, 14, 2, 1, 1, 50, 80),
    (15, 70, 830, 21.3, 0.0027, 7, 12, 1, 3, 2, 85, 60),
    (160, 320, 750, 24.4, 0.0015, 15, 18, 3, 2, 1, 30, 100),
    (30, 220, 860, 28.9, 0.0026, 15, 18, 3, 1, 2, 80, 50),
    (60, 470, 980, 21.9, 0.00109, 9, 12, 1, 1, 2, 65, 70),
]

INSTANCES = {
    "uc_4a": (UC_4A_UNITS, [350, 300, 500], [20, 10, 30], {"standard": 3, "warm_start": 3}),
    "uc_4b": (UC_4B_UNITS, [650, 530, 450], [50, 25, 15], {"standard": 3, "warm_start": 3}),
    "uc_10a": (UC_10_UNITS, [900, 1000, 1300], [20, 10, 30], {"standard": 6, "warm_start": 6}),
    "uc_10b": (UC_10_UNITS, [1300, 1400, 1200], [20, 10, 30], {"standard": 6, "warm_start": 6}),
    "uc_12a": (UC_10_UNITS + UC_12A_EXTRA, [1500, 1350, 1450], [20, 10, 30], {"standard": 12, "warm_start": 12}),
    "uc_12b": (UC_12B_UNITS, [2000, 2200, 2500], [50, 20, 40], {"standard": 7, "warm_start": 6}),
}

KEYS = [
    "p_min", "p_max", "a", "b", "c", "hot_start", "cold_start",
    "cold_start_time", "t_down", "t_up", "ramp_down", "ramp_up",
]


# Units that begin the horizon off (1-based).  UC_12b's published solutions
# start units 1, 3, 7 and 9 mid-horizon after off-periods shorter than their
# minimum downtimes, so those units must enter the horizon already off.
# UC_4b ships with every unit off (the parser's default convention): with
# pre-horizon on-time, a schedule that parks unit 2 at t=1 only undercuts
# the published optimum by 0.007%.
INITIALLY_OFF = {"uc_12b": {1, 3, 7, 9}, "uc_4b": {1, 2, 3, 4}}


def _initial(name: str, idx: int, row) -> dict:
    if (idx + 1) in INITIALLY_OFF.get(name, set()):
        t_down, cold_time = row[8], row[7]
        return {"on": False, "steps": t_down + cold_time + 1, "power": 0.0}
    return {"on": True, "steps": 100, "power": None}


def write_instances():
    for name, (units, load, reserve, n_it) in INSTANCES.items():
        doc = {
            "name": name,
            "units": [
                dict(zip(KEYS, row), initial=_initial(name, idx, row))
                for idx, row in enumerate(units)
            ],
            "load": load,
            "reserve": reserve,
            "n_it": n_it,
        }
        path = os.path.join(OUT, f"{name}.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
        print("wrote", path)


# Published solutions.  kind: reference = best classical solver,
# standard / warm_start = the two hybrid modes.  Each row: (bits, powers).
SOLUTIONS = {
    ("uc_4a", "reference"): (
        28282.1,
        [
            ("0101", [0, 100, 0, 250]),
            ("0101", [0, 85, 0, 215]),
            ("0111", [0, 100, 85, 315]),
        ],
    ),
    ("uc_4b", "reference"): (
        31988.52,
        [
            ("1011", [455, 0, 165, 30]),
            ("1010", [395, 0, 135, 0]),
            ("1010", [345, 0, 105, 0]),
        ],
    ),
    ("uc_10a", "reference"): (
        63541.3,
        [
            ("0001010010", [0, 0, 0, 90, 0, 355, 0, 0, 455, 0]),
            ("0001010010", [0, 0, 0, 130, 0, 415, 0, 0, 455, 0]),
            ("0011110010", [0, 0, 130, 130, 130, 455, 0, 0, 455, 0]),
        ],
    ),
    ("uc_10b", "reference"): (
        79621.3,
        [
            ("0011110011", [0, 0, 130, 130, 130, 430, 0, 0, 455, 25]),
            ("0011110011", [0, 0, 130, 130, 165, 455, 0, 0, 455, 65]),
            ("0011010011", [0, 0, 130, 125, 0, 455, 0, 0, 455, 35]),
        ],
    ),
    ("uc_12a", "reference"): (
        88046.7,
        [
            ("001111001010", [0, 0, 130, 130, 145, 455, 0, 0, 455, 0, 185, 0]),
            ("001111001010", [10, 10, 130, 130, 110, 410, 0, 0, 455, 0, 115, 0]),
            ("001111001010", [10, 10, 130, 130, 130, 455, 0, 0, 455, 0, 150, 0]),
        ],
    ),
    ("uc_12b", "reference"): (
        154514,
        [
            ("100101100101", [346, 0, 0, 360, 0, 444, 275, 0, 0, 175, 0, 400]),
            ("100101100101", [355, 0, 0, 360, 0, 465, 275, 0, 0, 275, 0, 470]),
            ("100111100101", [355, 0, 0, 360, 255, 465, 275, 0, 0, 320, 0, 470]),
        ],
    ),
    ("uc_4a", "standard"): (
        29279.2,
        [
            ("0001", [0, 0, 0, 350]),
            ("0001", [0, 0, 0, 300]),
            ("0101", [0, 100, 0, 400]),
        ],
    ),
    ("uc_4b", "standard"): (
        32370,
        [
            ("1011", [454.8, 0, 165, 30.2]),
            ("1100", [455.0, 75.0, 0, 0]),
            ("1100", [390.0, 60.0, 0, 0]),
        ],
    ),
    ("uc_10a", "standard"): (
        66771.8,
        [
            ("1000010010", [21.0, 0, 0, 0, 0, 424.4, 0, 0, 454.6, 0]),
            ("1000011010", [46, 0, 0, 0, 0, 455, 44, 0, 455, 0]),
            ("1010111010", [55, 0, 130, 0, 165, 455, 40, 0, 455, 0]),
        ],
    ),
    ("uc_10b", "standard"): (
        80166.6,
        [
            ("0011110010", [0, 0, 130, 129.2, 138.3, 447.7, 0, 0, 454.8, 0]),
            ("0011111010", [0, 0, 130, 130, 165, 455, 65, 0, 455, 0]),
            ("0011011010", [0, 0, 126.1, 125.7, 0, 448.2, 50, 0, 450, 0]),
        ],
    ),
    ("uc_12a", "standard"): (
        93148.7,
        [
            ("000111001001", [0, 0, 0, 130, 165, 455, 0, 0, 455, 0, 0, 295]),
            ("000011001001", [0, 0, 0, 0, 165, 455, 0, 0, 455, 0, 0, 275]),
            ("000011101001", [0, 0, 0, 0, 165, 455, 25, 0, 455, 0, 0, 350]),
        ],
    ),
    # The printed t=1,2,3 rows hold the t=3,2,1 solution (the only ordering
    # whose committed powers meet the loads); shipped re-ordered.
    ("uc_12b", "standard"): (
        162594.4,
        [
            ("010111000101", [0, 32.2, 0, 360, 352.8, 465, 0, 0, 0, 320, 0, 470]),
            ("110101101011", [355, 42.6, 0, 360, 0, 465, 275, 0, 70, 0, 162.4, 470.0]),
            ("101101101011", [355, 0, 313.6, 360, 0, 465, 275, 0, 70, 0, 191.4, 470]),
        ],
    ),
    ("uc_4a", "warm_start"): (
        29279.2,
        [
            ("0001", [0, 0, 0, 350]),
            ("0001", [0, 0, 0, 300]),
            ("0101", [0, 100, 0, 400]),
        ],
    ),
    ("uc_4b", "warm_start"): (
        32370,
        [
            ("1011", [454.8, 0, 165, 30.2]),
            ("1100", [455.0, 75.0, 0, 0]),
            ("1100", [390.0, 60.0, 0, 0]),
        ],
    ),
    ("uc_10a", "warm_start"): (
        66771.8,
        [
            ("1000010010", [21.0, 0, 0, 0, 0, 424.4, 0, 0, 454.6, 0]),
            ("1000011010", [46, 0, 0, 0, 0, 455, 44, 0, 455, 0]),
            ("1010111010", [55, 0, 130, 0, 165, 455, 40, 0, 455, 0]),
        ],
    ),
    ("uc_10b", "warm_start"): (
        80166.6,
        [
            ("0011110010", [0, 0, 130, 129.2, 138.3, 447.7, 0, 0, 454.8, 0]),
            ("0011111010", [0, 0, 130, 130, 165, 455, 65, 0, 455, 0]),
            ("0011011010", [0, 0, 126.1, 125.7, 0, 448.2, 50, 0, 450, 0]),
        ],
    ),
    ("uc_12a", "warm_start"): (
        89277.7,
        [
            ("001111001010", [0, 0, 129.9, 130, 161, 455, 0, 0, 454.6, 0, 169.5, 0]),
            ("001011001010", [0, 0, 130, 0, 145.8, 455, 0, 0, 455, 0, 164.2, 0]),
            ("101011011010", [34.3, 0, 130, 0, 165, 455, 0, 25.7, 455, 0, 185, 0]),
        ],
    ),
    ("uc_12b", "warm_start"): (
        158406.1,
        [
            ("110101101001", [355, 20, 0, 360, 0, 465, 275, 0, 70, 0, 0, 455]),
            ("110101101011", [355, 35.4, 0, 360, 0, 465, 275, 0, 70, 0, 169.6, 470.0]),
            ("100111100011", [355, 0, 0, 360, 380.2, 465, 275, 0, 0, 0, 194.8, 470]),
        ],
    ),
}


def write_solutions():
    outdir = os.path.join(OUT, "solutions")
    for (name, kind), (cost, rows) in SOLUTIONS.items():
        n = len(rows[0][0])
        schedule = [[int(bits[i]) for bits, _ in rows] for i in range(n)]
        dispatch = [[float(powers[i]) for _, powers in rows] for i in range(n)]
        doc = {
            "instance": name,
            "kind": kind,
            "expected_cost": cost,
            "schedule": schedule,
            "dispatch": dispatch,
        }
        path = os.path.join(outdir, f"{name}_{kind}.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
        print("wrote", path)


if __name__ == "__main__":
    write_instances()
    write_solutions()
