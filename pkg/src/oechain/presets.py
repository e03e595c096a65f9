"""Desk-scale presets for the figure-class experiments.

Each preset resolves to the exact caption parameter values; only grid
densities and sample counts are reduced relative to publication
resolution (40x40 phase grids, 20x20 conductance grids, 25-point
homotopies), and a scale factor can shrink or grow them further. The
constants below are transcribed once and exercised by a table-driven
test; nothing else in the package hard-codes them.
"""

import numpy as np

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7",
              "fig8w", "fig9", "fig10", "fig11-points")

# phase-plane standards
B_DEFAULT = 1.1
OMEGA_DEFAULT = 1.0
GRID_PHASE = 40
GRID_ML = 20
HOMOTOPY_SAMPLES = 25

# region-diagram windows
OE_BOUNDARY_C_OE = (0.1, 0.99)
OE_BOUNDARY_C_EO = (0.0, 0.6)

# subthreshold triple (two-relay chain)
TRIPLE_C_OE = 0.78
TRIPLE_C_EE = 0.5
TRIPLE_C_EO = (0.10, 0.13, 0.15)
TRIPLE_LABELS = ("0:1-s", "0:1-m", "0:1-a")

# chaos point
CHAOS_POINT = {"c_oe": 0.11, "c_eo": 0.49, "c_ee": 0.5}

# single-relay homotopy lines: label -> (start, end) in (c_oe, c_eo)
OEO_HOMOTOPIES = {
    "0:1": ((0.1, 0.15), (0.95, 0.05)),
    "1:2": ((0.1, 0.22), (0.95, 0.06)),
    "1:1": ((0.1, 0.3), (0.95, 0.075)),
}

# two-relay homotopy lines (non-bistable regions)
OEEO_HOMOTOPIES = {
    "1:1": ((0.1, 0.6), (0.95, 0.2)),
    "0:1": ((0.1, 0.35), (0.7, 0.15)),
    "1:2": ((0.1, 0.44), (0.8, 0.174)),
    "1:3": ((0.2, 0.36), (0.71, 0.19)),
}

# two-relay homotopy lines through bistable regions
OEEO_BISTABLE_HOMOTOPIES = {
    "0:1a-1:2-upper": ((0.15, 0.422), (0.406, 0.308)),
    "0:1a-1:2-lower": ((0.406, 0.308), (0.82, 0.167)),
    "0:1a-1:1": ((0.836, 0.17), (0.981, 0.109)),
}

OEEO_C_EE = 0.5

# pitchfork scan at the subthreshold column
PITCHFORK_C_OE = 0.78
PITCHFORK_C_EO = (0.08, 0.18)

# weak-coupling reference values
WEAK_C_OE_SAMPLES = (0.3, 0.5, 0.7, 0.9)
WEAK_C_EE = 0.5
WEAK_CROSSCHECK_C_EO = 0.01

# three-relay bistability point
OEEEO_POINT = {"c_oe": 0.75, "c_eo": 0.25, "c_ee": 0.18}
OEEEO_N_IC = 32
# seed whose uniform draw finds the middle-silent attractor at n_ic=32
OEEEO_SEED = 1

# hundred-relay chain
LONGCHAIN = {"n_cells": 100, "c_oe": 0.7, "c_eo": 2.0, "c_ee": 3.0,
             "b": B_DEFAULT}
LONGCHAIN_FREQ_CASES = ((1.0, 1.0), (1.1, 0.9), (1.5, 0.5))
LONGCHAIN_SEEDS = (1, 2, 3, 4)

# conductance-plane marked points: (c_oe, c_eo) -> label
ML_C_EE = 0.1
ML_MARKED_POINTS = {
    (0.4, 0.05): "0:1-m",
    (0.5, 0.057): "2:3-m",
    (0.63, 0.05): "2:4-m",
    (0.1, 0.065): "2:4-s",
}
ML_SCAN_C_OE = (0.05, 0.95)
ML_SCAN_C_EO = (0.02, 0.12)


def scaled(count: int, scale: float) -> int:
    return max(2, int(round(count * scale)))


def grid_values(lo: float, hi: float, count: int):
    return [float(v) for v in np.linspace(lo, hi, count)]


def preset(figure_id: str, scale: float = 1.0, seed: int = 0) -> dict:
    """Resolved parameters for one figure experiment.

    Returns a dict with 'kind' plus everything the runner needs; raises
    KeyError for an unknown id.
    """
    if figure_id not in FIGURE_IDS:
        raise KeyError("unknown figure id '%s'" % figure_id)
    b, om = B_DEFAULT, OMEGA_DEFAULT

    if figure_id == "fig1":
        return {
            "kind": "boundary", "topology": "oe",
            "b": b, "omega": om,
            "c_oe_values": grid_values(*OE_BOUNDARY_C_OE,
                                       scaled(12, scale)),
            "c_eo_bracket": OE_BOUNDARY_C_EO,
            "curves": ("fires", "one-to-one"),
            "rotation_c_oe": (0.1, 0.3, 0.5, 0.7),
            "seed": seed,
        }
    if figure_id == "fig2":
        n = scaled(GRID_PHASE, scale)
        return {
            "kind": "grid", "topology": "oeo", "b": b, "omega": om,
            "c_oe_values": grid_values(0.05, 0.95, n),
            "c_eo_values": grid_values(0.02, 0.5, n),
            "c_ee": 0.0, "seed": seed,
        }
    if figure_id == "fig3":
        return {
            "kind": "heterogeneity", "topology": "oeo", "b": b, "omega": om,
            "c_ee": 0.0, "lines": dict(OEO_HOMOTOPIES),
            "samples": scaled(HOMOTOPY_SAMPLES, scale),
            "d_bracket": (0.0, 0.5), "seed": seed,
        }
    if figure_id == "fig4":
        n = scaled(GRID_PHASE, scale)
        return {
            "kind": "grid", "topology": "oeeo", "b": b, "omega": om,
            "c_oe_values": grid_values(0.05, 0.95, n),
            "c_eo_values": grid_values(0.02, 0.7, n),
            "c_ee": OEEO_C_EE, "seed": seed,
        }
    if figure_id == "fig5":
        return {
            "kind": "classify-points", "topology": "oeeo",
            "b": b, "omega": om, "c_oe": TRIPLE_C_OE, "c_ee": TRIPLE_C_EE,
            "c_eo_values": TRIPLE_C_EO, "expected": TRIPLE_LABELS,
            "pitchfork_c_oe": PITCHFORK_C_OE,
            "pitchfork_c_eo": grid_values(*PITCHFORK_C_EO,
                                          scaled(11, scale)),
            "seed": seed,
        }
    if figure_id == "fig6":
        return {
            "kind": "chaos", "topology": "oeeo", "b": b, "omega": om,
            "point": dict(CHAOS_POINT), "section_level": 1.0,
            "seed": seed,
        }
    if figure_id == "fig7":
        lines = dict(OEEO_HOMOTOPIES)
        lines.update({"bi-" + k: v
                      for k, v in OEEO_BISTABLE_HOMOTOPIES.items()})
        return {
            "kind": "heterogeneity", "topology": "oeeo", "b": b, "omega": om,
            "c_ee": OEEO_C_EE, "lines": lines,
            "samples": scaled(HOMOTOPY_SAMPLES, scale),
            "d_bracket": (0.0, 0.5), "seed": seed,
        }
    if figure_id == "fig8w":
        return {
            "kind": "weakcoupling", "b": b, "c_ee": WEAK_C_EE,
            "c_oe_values": WEAK_C_OE_SAMPLES,
            "crosscheck_c_eo": WEAK_CROSSCHECK_C_EO,
            "critical_bracket": (0.3, 0.9),
            "b_values": grid_values(1.05, 1.4, scaled(8, scale)),
            "c_ee_values": grid_values(0.1, 1.0, scaled(8, scale)),
            "seed": seed,
        }
    if figure_id == "fig9":
        return {
            "kind": "bistability", "topology": "oeeeo", "b": b, "omega": om,
            "point": dict(OEEEO_POINT), "n_ic": OEEEO_N_IC,
            "seed": seed if seed else OEEEO_SEED,
        }
    if figure_id == "fig10":
        return {
            "kind": "longchain", "b": b,
            "chain": dict(LONGCHAIN),
            "freq_cases": LONGCHAIN_FREQ_CASES,
            "seeds": LONGCHAIN_SEEDS,
        }
    return {
        "kind": "ml-points", "c_ee": ML_C_EE,
        "points": dict(ML_MARKED_POINTS),
        "scan_c_oe": grid_values(*ML_SCAN_C_OE, scaled(GRID_ML, scale)),
        "scan_c_eo": grid_values(*ML_SCAN_C_EO, scaled(GRID_ML, scale)),
        "seed": seed,
    }
