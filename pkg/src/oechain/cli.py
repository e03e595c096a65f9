"""Command-line front end.

Two entry points: `oechain run CONFIG` executes one experiment described
by an INI file; `oechain reproduce FIGURE-ID` runs a named preset at desk
scale. Both write a result.json (resolved config echo, tool version,
outputs) plus flat CSV tables: one header line naming the columns, then
comma-separated rows with full round-trip decimal precision. Outputs
carry no timestamps, so identical config and seed give byte-identical
files.
"""

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__, analysis, ml, presets, sweep, weak_coupling
from .config import (ConfigError, build_chain_spec, build_integrator,
                     config_to_jsonable, parse_config, parse_pattern)
from .integrate import ML_CONFIG, IntegratorConfig, integrate, poincare_section
from .model import ChainSpec, chain, oe_pair, oeo, oeeo


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(path: str, columns, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_record(out_dir: str, resolved: dict, outputs: dict):
    record = {"tool": "oechain", "version": __version__,
              "config": config_to_jsonable(resolved), "outputs": outputs}
    path = os.path.join(out_dir, "result.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _clean(value):
    """Make outputs JSON-safe and deterministic."""
    if isinstance(value, dict):
        return {str(k): _clean(value[k]) for k in sorted(value, key=str)}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return None if math.isnan(v) else v
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    return value


# ---------------------------------------------------------------------------
# run: one experiment from an INI file

def _initial_state(resolved, spec):
    given = resolved.get("simulate", {}).get("initial_state")
    if given is None:
        return analysis.protocol_ic(spec)
    state = np.array(given, dtype=float)
    if state.size != spec.dim:
        raise ConfigError("field 'initial_state' needs %d values" % spec.dim)
    return state


def _run_simulate(resolved, out_dir):
    spec = build_chain_spec(resolved)
    cfg = build_integrator(resolved)
    traj = integrate(spec, _initial_state(resolved, spec), cfg)
    cols = ["t"] + ["cell%d" % i for i in range(spec.dim)]
    rows = [[traj.times[i]] + list(traj.states[i])
            for i in range(len(traj.times))]
    write_table(os.path.join(out_dir, "trajectory.csv"), cols, rows)
    return {"final_state": list(traj.final_state),
            "firing_counts": [traj.firings[c].size
                              for c in range(spec.dim)]}


def _run_rotation(resolved, out_dir):
    spec = build_chain_spec(resolved)
    params = resolved.get("rotation", {})
    est = analysis.rotation_number(
        spec, horizon=params.get("horizon", 5000.0),
        t_transient=params.get("transient", 500.0),
        tol=params.get("tol", 1e-3))
    rho = 0.0 if est.fixed_point else est.rho
    write_table(os.path.join(out_dir, "rotation.csv"),
                ["rho", "half_width", "converged", "fixed_point"],
                [[rho, est.half_width, est.converged, est.fixed_point]])
    return {"rho": rho, "converged": bool(est.converged),
            "fixed_point": bool(est.fixed_point)}


def _run_classify(resolved, out_dir):
    spec = build_chain_spec(resolved)
    cfg = build_integrator(resolved)
    params = resolved.get("classify", {})
    traj = integrate(spec, analysis.protocol_ic(spec), cfg)
    pattern = analysis.classify_locking(
        traj, spec, tol_sync=params.get("tol_sync", 0.05),
        mixed_std=params.get("mixed_std", 0.02),
        refine_repeat_unit=params.get("refine", False))
    write_table(os.path.join(out_dir, "classification.csv"),
                ["n", "m", "relation", "phase_difference", "label"],
                [[pattern.n, pattern.m, pattern.relation,
                  pattern.phase_difference, pattern.label()]])
    return {"label": pattern.label(), "n": pattern.n, "m": pattern.m,
            "relation": pattern.relation}


_PREDICATES = {"fires": lambda: sweep.predicate_fires(1),
               "one-to-one": lambda: sweep.predicate_one_to_one(1),
               "fixed-point": sweep.predicate_fixed_point}


def _run_boundary(resolved, out_dir):
    spec = build_chain_spec(resolved)
    params = resolved.get("boundary", {})
    predicate = _PREDICATES[params.get("predicate", "fires")]()
    curve = sweep.trace_boundary(
        lambda c_oe, c_eo: replace(spec, c_oe=c_oe, c_eo=c_eo),
        params.get("c_oe_values", presets.grid_values(0.1, 0.95, 12)),
        predicate, tuple(params.get("c_eo_bracket", (0.0, 0.6))),
        tol=params.get("tol", 1e-3), warm_start=params.get("warm", True),
        label=params.get("predicate", "fires"))
    write_table(os.path.join(out_dir, "boundary.csv"), ["c_oe", "c_eo"],
                [list(p) for p in curve.points])
    return {"label": curve.label, "n_points": int(len(curve.points)),
            "skipped": [float(v) for v in curve.skipped]}


def _run_heterogeneity(resolved, out_dir):
    spec = build_chain_spec(resolved)
    params = resolved.get("heterogeneity", {})
    line = sweep.HomotopyLine(tuple(params.get("line_start", (0.1, 0.3))),
                              tuple(params.get("line_end", (0.95, 0.075))),
                              params.get("samples", 25))
    n, m = parse_pattern(params.get("pattern", "1:1"))
    curve = sweep.max_heterogeneity(
        line, lambda c_oe, c_eo, d: replace(spec, c_oe=c_oe, c_eo=c_eo, d=d),
        sweep.pattern_matcher(n, m),
        d_bracket=tuple(params.get("d_bracket", (0.0, 0.5))),
        tol=params.get("tol", 1e-3))
    rows = []
    for p, d in zip(curve.p_values, curve.d_max):
        c_oe, c_eo = line.point(p)
        rows.append([p, c_oe, c_eo, d])
    write_table(os.path.join(out_dir, "heterogeneity.csv"),
                ["p", "c_oe", "c_eo", "d_max"], rows)
    return {"pattern": "%d:%d" % (n, m),
            "d_max": _clean(curve.d_max),
            "notes": [[float(p), note] for p, note in curve.notes]}


def _run_bistability(resolved, out_dir):
    spec = build_chain_spec(resolved)
    params = resolved.get("bistability", {})
    aset = sweep.bistability_scan(spec, n_ic=params.get("n_ic", 32),
                                  seed=resolved["experiment"]["seed"])
    rows = [[p.label(), frac] for p, frac, _ in aset.patterns]
    write_table(os.path.join(out_dir, "bistability.csv"),
                ["label", "fraction"], rows)
    return {"labels": aset.labels(),
            "fractions": [float(f) for _, f, _ in aset.patterns]}


def _run_pitchfork(resolved, out_dir):
    spec = build_chain_spec(resolved)
    params = resolved.get("pitchfork", {})
    c_oe = params.get("c_oe", spec.c_oe)
    values = params.get("c_eo_values", presets.grid_values(0.08, 0.18, 11))
    points = sweep.pitchfork_diagram(c_oe, values, c_ee=spec.c_ee,
                                     b=spec.b, omega=spec.omega)
    rows = [[pt.c_eo, pt.sync_stable, pt.anti_stable, pt.mixed_offset]
            for pt in points]
    write_table(os.path.join(out_dir, "pitchfork.csv"),
                ["c_eo", "sync_stable", "anti_stable", "mixed_offset"], rows)
    return {"c_oe": c_oe,
            "mixed_window": [pt.c_eo for pt in points
                             if not math.isnan(pt.mixed_offset)]}


def _run_weakcoupling(resolved, out_dir):
    sys_cfg = resolved.get("system", {})
    params = resolved.get("weakcoupling", {})
    b = sys_cfg.get("b", 1.1)
    c_ee = sys_cfg.get("c_ee", 0.5)
    skew = params.get("skew", 0.0)
    rows = []
    for c_oe in params.get("c_oe_values", presets.WEAK_C_OE_SAMPLES):
        table = weak_coupling.build_table(
            weak_coupling.ReductionInputs(c_oe=c_oe, c_ee=c_ee, b=b,
                                          skew=skew))
        rows.append([c_oe, table.T, table.gprime0, table.gprimeT2])
    write_table(os.path.join(out_dir, "weakcoupling.csv"),
                ["c_oe", "period", "slope_sync", "slope_anti"], rows)
    outputs = {"rows": int(len(rows))}
    if params.get("critical", False):
        bracket = tuple(params.get("bracket", (0.3, 0.9)))
        outputs["critical_c_oe"] = weak_coupling.critical_coe(
            b=b, c_ee=c_ee, bracket=bracket, skew=skew)
    return outputs


def _run_ml_scan(resolved, out_dir):
    sys_cfg = resolved.get("system", {})
    params = resolved.get("ml-scan", {})
    labels, _ = ml.ml_region_scan(
        params.get("c_oe_values", presets.grid_values(0.05, 0.95, 8)),
        params.get("c_eo_values", presets.grid_values(0.02, 0.12, 8)),
        g_ee=sys_cfg.get("c_ee", 0.1), n_ic=params.get("n_ic", 4),
        seed=resolved["experiment"]["seed"])
    rows = []
    c_oes = params.get("c_oe_values", presets.grid_values(0.05, 0.95, 8))
    c_eos = params.get("c_eo_values", presets.grid_values(0.02, 0.12, 8))
    for ie, c_eo in enumerate(c_eos):
        for io, c_oe in enumerate(c_oes):
            rows.append([c_oe, c_eo, labels[ie, io]])
    write_table(os.path.join(out_dir, "ml_scan.csv"),
                ["c_oe", "c_eo", "labels"], rows)
    return {"n_points": int(len(rows))}


def _run_longchain(resolved, out_dir):
    spec = build_chain_spec(resolved)
    params = resolved.get("longchain", {})
    seeds = params.get("seeds", list(presets.LONGCHAIN_SEEDS))
    cfg = build_integrator(resolved)
    rows = []
    offsets = []
    label = ""
    for seed in seeds:
        rng = np.random.default_rng(seed)
        traj = integrate(spec, analysis.random_ic(spec.dim, rng), cfg)
        pattern = analysis.classify_locking(traj, spec)
        offset = pattern.phase_difference
        offsets.append(offset)
        label = pattern.label()
        rows.append([seed, pattern.label(), offset])
    write_table(os.path.join(out_dir, "longchain.csv"),
                ["seed", "label", "offset"], rows)
    return {"labels": [r[1] for r in rows], "offsets": _clean(offsets),
            "last_label": label}


_RUNNERS = {"simulate": _run_simulate, "rotation": _run_rotation,
            "classify": _run_classify, "boundary": _run_boundary,
            "heterogeneity": _run_heterogeneity,
            "bistability": _run_bistability, "pitchfork": _run_pitchfork,
            "weakcoupling": _run_weakcoupling, "ml-scan": _run_ml_scan,
            "longchain": _run_longchain}


def run_experiment(config_path: str, out_dir: str) -> dict:
    resolved = parse_config(config_path)
    os.makedirs(out_dir, exist_ok=True)
    kind = resolved["experiment"]["kind"]
    outputs = _clean(_RUNNERS[kind](resolved, out_dir))
    write_record(out_dir, resolved, outputs)
    return outputs


# ---------------------------------------------------------------------------
# reproduce: named presets

def _spec_for(topology: str, p: dict, **kw) -> ChainSpec:
    makers = {"oe": oe_pair, "oeo": oeo, "oeeo": oeeo}
    if topology in makers:
        return makers[topology](**kw)
    if topology == "oeeeo":
        return chain(n_excitable=3, **kw)
    raise KeyError(topology)


def _repro_boundary(p, out_dir):
    spec = oe_pair(c_oe=0.5, c_eo=0.1, b=p["b"], omega=p["omega"])
    outputs = {}
    for name in p["curves"]:
        predicate = _PREDICATES[name]()
        curve = sweep.trace_boundary(
            lambda c_oe, c_eo: replace(spec, c_oe=c_oe, c_eo=c_eo),
            p["c_oe_values"], predicate, p["c_eo_bracket"], label=name)
        write_table(os.path.join(out_dir, "boundary_%s.csv" % name),
                    ["c_oe", "c_eo"], [list(pt) for pt in curve.points])
        outputs[name] = {"n_points": int(len(curve.points)),
                         "skipped": [float(v) for v in curve.skipped]}
    rows = []
    for c_oe in p["rotation_c_oe"]:
        for c_eo in presets.grid_values(0.02, 0.4, 20):
            est = analysis.rotation_number(replace(spec, c_oe=c_oe,
                                                   c_eo=c_eo))
            rho = 0.0 if est.fixed_point else est.rho
            rows.append([c_oe, c_eo, rho])
    write_table(os.path.join(out_dir, "rotation_curves.csv"),
                ["c_oe", "c_eo", "rho"], rows)
    return outputs


def _repro_grid(p, out_dir):
    spec = _spec_for(p["topology"], p, c_oe=0.5, c_eo=0.1, c_ee=p["c_ee"],
                     b=p["b"], omega=p["omega"])
    labels = sweep.classification_grid(
        lambda c_oe, c_eo: replace(spec, c_oe=c_oe, c_eo=c_eo),
        p["c_oe_values"], p["c_eo_values"])
    rows = []
    for ie, c_eo in enumerate(p["c_eo_values"]):
        for io, c_oe in enumerate(p["c_oe_values"]):
            rows.append([c_oe, c_eo, labels[ie, io]])
    write_table(os.path.join(out_dir, "grid.csv"),
                ["c_oe", "c_eo", "label"], rows)
    return {"n_points": int(len(rows))}


def _repro_heterogeneity(p, out_dir):
    spec = _spec_for(p["topology"], p, c_oe=0.5, c_eo=0.1, c_ee=p["c_ee"],
                     b=p["b"], omega=p["omega"])
    outputs = {}
    for name in sorted(p["lines"]):
        start, end = p["lines"][name]
        target = name.split("-")[-1] if name.startswith("bi-") else name
        n, m = parse_pattern(target) if ":" in target else (1, 1)
        line = sweep.HomotopyLine(start, end, p["samples"])
        curve = sweep.max_heterogeneity(
            line,
            lambda c_oe, c_eo, d: replace(spec, c_oe=c_oe, c_eo=c_eo, d=d),
            sweep.pattern_matcher(n, m), d_bracket=p["d_bracket"])
        rows = []
        for pv, d in zip(curve.p_values, curve.d_max):
            c_oe, c_eo = line.point(pv)
            rows.append([pv, c_oe, c_eo, d])
        fname = "heterogeneity_%s.csv" % name.replace(":", "to")
        write_table(os.path.join(out_dir, fname),
                    ["p", "c_oe", "c_eo", "d_max"], rows)
        valid = curve.d_max[~np.isnan(curve.d_max)]
        outputs[name] = {"d_max_peak": float(valid.max()) if valid.size
                         else None}
    return outputs


def _repro_classify_points(p, out_dir):
    rows = []
    labels = []
    for c_eo, expected in zip(p["c_eo_values"], p["expected"]):
        spec = oeeo(c_oe=p["c_oe"], c_eo=c_eo, c_ee=p["c_ee"], b=p["b"],
                    omega=p["omega"])
        traj = sweep.probe(spec)
        pattern = analysis.classify_locking(traj, spec)
        labels.append(pattern.label())
        rows.append([p["c_oe"], c_eo, expected, pattern.label(),
                     pattern.phase_difference])
    write_table(os.path.join(out_dir, "points.csv"),
                ["c_oe", "c_eo", "expected", "label", "phase_difference"],
                rows)
    points = sweep.pitchfork_diagram(p["pitchfork_c_oe"],
                                     p["pitchfork_c_eo"])
    write_table(os.path.join(out_dir, "pitchfork.csv"),
                ["c_eo", "sync_stable", "anti_stable", "mixed_offset"],
                [[pt.c_eo, pt.sync_stable, pt.anti_stable, pt.mixed_offset]
                 for pt in points])
    return {"labels": labels}


def _repro_chaos(p, out_dir):
    pt = p["point"]
    spec = oeeo(c_oe=pt["c_oe"], c_eo=pt["c_eo"], c_ee=pt["c_ee"],
                b=p["b"], omega=p["omega"])
    est = analysis.lyapunov_exponent(spec)
    cfg = IntegratorConfig(dt=0.005, t_transient=500.0, t_record=3000.0,
                           sample_every=2)
    traj = integrate(spec, analysis.protocol_ic(spec), cfg)
    t_cross, section = poincare_section(traj, coord=0,
                                        level=p["section_level"])
    rows = [[t_cross[i]] + list(section[i]) for i in range(len(t_cross))]
    write_table(os.path.join(out_dir, "poincare.csv"),
                ["t", "y1", "y2", "z"], rows)
    return {"lyapunov": est.lam, "lyapunov_stderr": est.stderr,
            "n_section_points": int(len(t_cross))}


def _repro_bistability(p, out_dir):
    pt = p["point"]
    spec = chain(n_excitable=3, c_oe=pt["c_oe"], c_eo=pt["c_eo"],
                 c_ee=pt["c_ee"], b=p["b"], omega=p["omega"])
    aset = sweep.bistability_scan(spec, n_ic=p["n_ic"], seed=p["seed"])
    rows = [[pat.label(), frac] for pat, frac, _ in aset.patterns]
    write_table(os.path.join(out_dir, "bistability.csv"),
                ["label", "fraction"], rows)
    return {"labels": aset.labels()}


def _repro_weak(p, out_dir):
    rows = []
    for c_oe in p["c_oe_values"]:
        table = weak_coupling.build_table(
            weak_coupling.ReductionInputs(c_oe=c_oe, c_ee=p["c_ee"],
                                          b=p["b"]))
        rows.append([c_oe, table.T, table.gprime0, table.gprimeT2])
    write_table(os.path.join(out_dir, "slopes.csv"),
                ["c_oe", "period", "slope_sync", "slope_anti"], rows)
    critical = weak_coupling.critical_coe(b=p["b"], c_ee=p["c_ee"],
                                          bracket=p["critical_bracket"])
    crows = []
    for b in p["b_values"]:
        try:
            crows.append([b, p["c_ee"],
                          weak_coupling.critical_coe(b=b, c_ee=p["c_ee"],
                                                     bracket=(0.2, 0.95))])
        except ValueError:
            continue
    for c_ee in p["c_ee_values"]:
        try:
            crows.append([p["b"], c_ee,
                          weak_coupling.critical_coe(b=p["b"], c_ee=c_ee,
                                                     bracket=(0.2, 0.95))])
        except ValueError:
            continue
    write_table(os.path.join(out_dir, "critical.csv"),
                ["b", "c_ee", "critical_c_oe"], crows)
    return {"critical_c_oe": critical}


def _repro_longchain(p, out_dir):
    c = p["chain"]
    outputs = {}
    rows = []
    for wx, wz in p["freq_cases"]:
        spec = chain(n_excitable=c["n_cells"], c_oe=c["c_oe"],
                     c_eo=c["c_eo"], c_ee=c["c_ee"], b=c["b"],
                     omega_x=wx, omega_z=wz)
        cfg = IntegratorConfig(dt=0.005, t_transient=2000.0,
                               t_record=1000.0, sample_every=8)
        case = []
        for seed in p["seeds"]:
            rng = np.random.default_rng(seed)
            traj = integrate(spec, analysis.random_ic(spec.dim, rng), cfg)
            pattern = analysis.classify_locking(traj, spec)
            case.append((seed, pattern.label(), pattern.phase_difference))
            rows.append([wx, wz, seed, pattern.label(),
                         pattern.phase_difference])
        outputs["%g_%g" % (wx, wz)] = {"labels": [c2[1] for c2 in case]}
    write_table(os.path.join(out_dir, "longchain.csv"),
                ["omega_x", "omega_z", "seed", "label", "offset"], rows)
    return outputs


def _repro_ml_points(p, out_dir):
    rows = []
    labels = {}
    for (g_oe, g_eo) in sorted(p["points"]):
        expected = p["points"][(g_oe, g_eo)]
        net = ml.oeeo_network(g_oe, g_eo, p["c_ee"])
        traj = ml.run_ml(net, ml.marked_point_ic(g_oe, g_eo))
        pattern = ml.ml_classify(net, traj)
        vx = traj.states[:, 0]
        vz = traj.states[:, 2 * (net.n_cells - 1)]
        overlap = float(np.max(np.abs(vx - vz)))
        rows.append([g_oe, g_eo, expected, pattern.label(), overlap])
        labels["%g_%g" % (g_oe, g_eo)] = pattern.label()
    write_table(os.path.join(out_dir, "ml_points.csv"),
                ["c_oe", "c_eo", "expected", "label", "max_vx_vz_gap"],
                rows)
    return {"labels": labels}


_REPRO = {"boundary": _repro_boundary, "grid": _repro_grid,
          "heterogeneity": _repro_heterogeneity,
          "classify-points": _repro_classify_points, "chaos": _repro_chaos,
          "bistability": _repro_bistability, "weakcoupling": _repro_weak,
          "longchain": _repro_longchain, "ml-points": _repro_ml_points}


def reproduce(figure_id: str, out_dir: str, seed: int = 0,
              scale: float = 1.0) -> dict:
    p = presets.preset(figure_id, scale=scale, seed=seed)
    os.makedirs(out_dir, exist_ok=True)
    outputs = _clean(_REPRO[p["kind"]](p, out_dir))
    record = {"tool": "oechain", "version": __version__,
              "figure": figure_id, "scale": scale, "seed": seed,
              "outputs": outputs}
    with open(os.path.join(out_dir, "result.json"), "w",
              encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return outputs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oechain",
        description="Simulate and analyze oscillator-excitable chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default="results")

    p_rep = sub.add_parser("reproduce", help="run a named figure preset")
    p_rep.add_argument("figure_id", choices=list(presets.FIGURE_IDS))
    p_rep.add_argument("--out", default=None)
    p_rep.add_argument("--seed", type=int, default=0)
    p_rep.add_argument("--scale", type=float, default=1.0)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            run_experiment(args.config, args.out)
        else:
            out = args.out or ("results_%s" % args.figure_id)
            reproduce(args.figure_id, out, seed=args.seed, scale=args.scale)
    except (ConfigError, configparser.Error) as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except (KeyError, ValueError, RuntimeError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
