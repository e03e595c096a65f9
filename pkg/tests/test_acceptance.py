"""Acceptance gate: one test per product-level criterion.

Each test prints a single `[criterion N] PASS/FAIL` line (visible under
`pytest -s`, or in the failure report otherwise) and then asserts, so a
red run still shows every verdict. Tolerances are part of the criterion
statements; nothing here is tuned to make a test green.
"""

import math

import numpy as np
import pytest

from oechain.analysis import (SYNCHRONOUS, _circular_mean, classify_locking,
                              lyapunov_exponent, protocol_ic, random_ic,
                              rotation_number)
from oechain.integrate import IntegratorConfig, integrate, poincare_section
from oechain.ml import ml_classify, marked_point_ic, oeeo_network, run_ml
from oechain.model import chain, oe_pair, oeeo, oeo, saddle_node_c_eo
from oechain.sweep import (bistability_scan, predicate_fires,
                           predicate_one_to_one, probe, trace_boundary)
from oechain.weak_coupling import ReductionInputs, build_table

TWO_PI = 2.0 * math.pi


def _report(n, ok, detail):
    print("[criterion %d] %s - %s" % (n, "PASS" if ok else "FAIL", detail))
    return ok


def _wrap(a):
    return (np.asarray(a) + math.pi) % TWO_PI - math.pi


# -- 1: the firing-onset and one-to-one boundaries of the driven pair both
#       approach c_eo = b - 1 as c_oe nears the end frequency

def test_criterion_01_pair_boundaries_pinch():
    columns = (0.1, 0.3, 0.5, 0.7, 0.9, 0.99)
    ends = {}
    for name, predicate in (("fires", predicate_fires(1)),
                            ("one-to-one", predicate_one_to_one(1))):
        curve = trace_boundary(lambda a, b: oe_pair(a, b), columns,
                               predicate, (0.0, 0.6), label=name)
        by_col = {round(p[0], 6): p[1] for p in curve.points}
        ends[name] = by_col.get(0.99, math.nan)
    gaps = {k: abs(v - 0.1) for k, v in ends.items()}
    ok = all(g < 0.01 for g in gaps.values())
    _report(1, ok, "c_eo at c_oe=0.99: fires=%.5f one-to-one=%.5f "
            "(target 0.1 within 0.01)" % (ends["fires"], ends["one-to-one"]))
    assert ok


# -- 2: the stall onset found by simulation matches the closed-form
#       saddle-node line c_eo = (b-1) c_oe / omega

def test_criterion_02_saddle_node_onset():
    diffs = {}
    for c_oe in (1.2, 1.5, 2.0):
        lo, hi = 0.0, 0.4

        def stalled(c_eo):
            return rotation_number(oe_pair(c_oe, c_eo)).fixed_point

        assert stalled(lo) and not stalled(hi)
        while hi - lo > 1e-4:
            mid = 0.5 * (lo + hi)
            if stalled(mid):
                lo = mid
            else:
                hi = mid
        onset = 0.5 * (lo + hi)
        diffs[c_oe] = abs(onset - saddle_node_c_eo(c_oe))
    ok = all(d <= 1e-3 for d in diffs.values())
    _report(2, ok, "onset error vs (b-1)c_oe: %s" %
            {k: round(v, 6) for k, v in diffs.items()})
    assert ok


# -- 3: on a 20x20 single-relay grid at d=0, random initial data always
#       ends with the end oscillators synchronous

LADDER = ((3000.0, 0.005), (17000.0, 0.01), (80000.0, 0.01), (300000.0, 0.01))


def test_criterion_03_relay_grid_synchronizes():
    vals = np.linspace(0.05, 0.95, 20)
    failures = []
    index = 0
    for c_eo in vals:
        for c_oe in vals:
            spec = oeo(c_oe, c_eo)
            state = random_ic(spec.dim, np.random.default_rng([0, index]))
            index += 1
            ok = False
            for t_transient, dt in LADDER:
                cfg = IntegratorConfig(
                    dt=dt, t_transient=t_transient, t_record=1000.0,
                    sample_every=max(1, int(round(0.02 / dt))))
                traj = integrate(spec, state, cfg)
                state = traj.final_state
                if classify_locking(traj, spec).relation == SYNCHRONOUS:
                    ok = True
                    break
            if not ok:
                failures.append((round(float(c_oe), 4),
                                 round(float(c_eo), 4)))
    ok = not failures
    _report(3, ok, "%d/400 cells not synchronous%s" %
            (len(failures), ": %s" % failures if failures else ""))
    assert ok


# -- 4: the subthreshold column shows synchronous, mixed, and anti-phase
#       silent-relay states in order

def test_criterion_04_subthreshold_triple():
    expected = ("0:1-s", "0:1-m", "0:1-a")
    labels = []
    for c_eo in (0.10, 0.13, 0.15):
        spec = oeeo(0.78, c_eo, 0.5)
        labels.append(classify_locking(probe(spec), spec).label())
    ok = tuple(labels) == expected
    _report(4, ok, "labels %s (expected %s)" % (labels, list(expected)))
    assert ok


# -- 5: the chaotic point has a positive Lyapunov exponent and a section
#       that is neither a fixed point nor a short cycle

def test_criterion_05_chaos_diagnostics():
    spec = oeeo(0.11, 0.49, 0.5)
    est = lyapunov_exponent(spec)
    lam_ok = 0.01 <= est.lam <= 0.08

    cfg = IntegratorConfig(dt=0.005, t_transient=500.0, t_record=3000.0,
                           sample_every=2)
    traj = integrate(spec, protocol_ic(spec), cfg)
    _, section = poincare_section(traj, coord=0, level=1.0)
    distinct = len({tuple(np.round(row, 6)) for row in section})
    many_ok = distinct > 100

    min_return = math.inf
    for k in range(1, 9):
        gaps = np.abs(_wrap(section[k:] - section[:-k])).max(axis=1)
        min_return = min(min_return, float(gaps.min()))
    cycle_ok = min_return > 1e-2

    ok = lam_ok and many_ok and cycle_ok
    _report(5, ok, "lyapunov=%.4f+-%.4f, %d distinct section points, "
            "closest period<=8 return %.3f" %
            (est.lam, est.stderr, distinct, min_return))
    assert ok


# -- 6: the averaged offset dynamics has the half-period symmetry of the
#       pure-sine waveform, and its synchrony slope changes sign between
#       c_oe = 0.5 and 0.7

def test_criterion_06_offset_slope_symmetry_and_flip():
    slopes = {}
    sym_ok = True
    for c_oe in (0.3, 0.5, 0.7, 0.9):
        table = build_table(ReductionInputs(c_oe=c_oe))
        slopes[c_oe] = table.gprime0
        if abs(table.gprimeT2 + table.gprime0) >= (1e-6 * abs(table.gprime0)
                                                   + 1e-10):
            sym_ok = False
    flip_ok = slopes[0.5] > 0.0 > slopes[0.7]
    ok = sym_ok and flip_ok
    _report(6, ok, "slopes %s, symmetry %s, sign flip %s" %
            ({k: round(v, 6) for k, v in slopes.items()}, sym_ok, flip_ok))
    assert ok


# -- 7: at weak feedback the full chain settles on the offset the
#       averaged dynamics says is attracting

def test_criterion_07_weak_feedback_crosscheck():
    cfg = IntegratorConfig(dt=0.01, t_transient=60000.0, t_record=2000.0,
                           sample_every=10)
    errors = {}
    for c_oe in (0.5, 0.7):
        table = build_table(ReductionInputs(c_oe=c_oe))
        stable = [z for z, s in table.zeros if s < 0]
        target = 0.0 if any(z == 0.0 for z in stable) else math.pi
        spec = oeeo(c_oe, 0.01, 0.5)
        traj = integrate(spec, protocol_ic(spec), cfg)
        mu = _circular_mean(traj.states[:, 0] - traj.states[:, -1])
        err = abs(float(_wrap(abs(mu) - target)))
        errors[c_oe] = (target, err)
    ok = all(err < 0.15 for _, err in errors.values())
    _report(7, ok, "offset vs predicted stable zero: %s" %
            {k: (("pi" if t else "0"), round(e, 4))
             for k, (t, e) in errors.items()})
    assert ok


# -- 8: the three-relay chain is multistable, with an attractor whose
#       middle relay is silent while the outer relays lock one-to-one

def test_criterion_08_three_relay_bistability():
    spec = chain(3, 0.75, 0.25, 0.18)
    aset = bistability_scan(spec, n_ic=32, seed=1)
    multi_ok = len(aset.patterns) >= 2

    silent_ok = False
    for pattern, _, witness in aset.patterns:
        r = pattern.reduced()
        if (r.n, r.m) != (1, 1):
            continue
        check = probe(spec, witness)
        n_osc = check.firings[0].size
        outer = (check.firings[1].size, check.firings[3].size)
        if (check.firings[2].size == 0
                and all(abs(n - n_osc) <= 2 for n in outer)):
            silent_ok = True
    ok = multi_ok and silent_ok
    _report(8, ok, "attractors %s, middle-silent outer-1:1 %s" %
            (aset.labels(), silent_ok))
    assert ok


# -- 9: the hundred-relay chain shows history-dependent offsets at equal
#       end frequencies, a unique offset under moderate detuning, and
#       1:2 locking under strong detuning

def _longchain_offsets(d):
    spec = chain(100, 0.7, 2.0, 3.0, b=1.1, d=d)
    cfg = IntegratorConfig(dt=0.005, t_transient=2000.0, t_record=1000.0,
                           sample_every=8)
    offsets, ratios = [], []
    for seed in (1, 2, 3, 4):
        traj = integrate(spec, random_ic(spec.dim,
                                         np.random.default_rng(seed)), cfg)
        pattern = classify_locking(traj, spec)
        offsets.append(pattern.phase_difference)
        r = pattern.reduced()
        ratios.append((r.n, r.m, r.relation))
    return np.array(offsets), ratios


def test_criterion_09_long_chain_frequency_cases():
    def pairwise(values):
        gaps = [abs(float(_wrap(a - b)))
                for i, a in enumerate(values) for b in values[i + 1:]]
        return min(gaps), max(gaps)

    equal, _ = _longchain_offsets(0.0)
    min_gap, _ = pairwise(equal)
    distinct_ok = min_gap > 0.1

    near, near_ratios = _longchain_offsets(0.1)
    _, max_gap = pairwise(near)
    near_ok = max_gap < 0.02 and all(r[:2] == (1, 1) for r in near_ratios)

    far, far_ratios = _longchain_offsets(0.5)
    far_ok = all(r[:2] == (1, 2) for r in far_ratios)

    ok = distinct_ok and near_ok and far_ok
    _report(9, ok, "equal-rate offsets %s (min gap %.3f), detuned gap %.4f "
            "ratio %s, strong-detuning ratio %s" %
            (np.round(equal, 3).tolist(), min_gap, max_gap,
             near_ratios[0][:2], far_ratios[0][:2]))
    assert ok


# -- 10: the conductance-based line reproduces the marked states, and the
#        symmetric point keeps its end voltages equal

def test_criterion_10_conductance_marked_points():
    expected = {(0.4, 0.05): "0:1-m", (0.5, 0.057): "2:3-m",
                (0.63, 0.05): "2:4-m", (0.1, 0.065): "2:4-s"}
    results = {}
    gap = math.nan
    for (g_oe, g_eo), want in expected.items():
        net = oeeo_network(g_oe, g_eo, 0.1)
        traj = run_ml(net, marked_point_ic(g_oe, g_eo))
        results[(g_oe, g_eo)] = ml_classify(net, traj).label()
        if (g_oe, g_eo) == (0.1, 0.065):
            gap = float(np.abs(traj.states[:, 0] - traj.states[:, 6]).max())
    labels_ok = results == expected
    gap_ok = gap < 1.0
    ok = labels_ok and gap_ok
    _report(10, ok, "labels %s (expected %s), symmetric-point gap %.3f mV" %
            (results, expected, gap))
    assert ok


# -- 11: the integrator is fourth order in step size and seeded runs are
#        byte-identical

def test_criterion_11_order_and_determinism():
    spec = oeeo(0.78, 0.13, 0.5)
    s0 = np.array([0.3, -0.4, -0.5, 1.1])

    def endpoint(dt):
        cfg = IntegratorConfig(dt=dt, t_record=20.0,
                               sample_every=int(round(20.0 / dt)))
        return integrate(spec, s0, cfg).final_state

    ref = endpoint(0.00125)
    errs = [np.abs(endpoint(dt) - ref).max() for dt in (0.02, 0.01, 0.005)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    order_ok = bool(orders.min() > 3.7)

    cfg = IntegratorConfig(dt=0.005, t_transient=100.0, t_record=100.0,
                           sample_every=10)
    rerun_ok = (integrate(spec, s0, cfg).states.tobytes()
                == integrate(spec, s0, cfg).states.tobytes())

    scan_spec = oeeo(0.9, 0.16, 0.5)
    a = bistability_scan(scan_spec, n_ic=8, seed=2)
    b = bistability_scan(scan_spec, n_ic=8, seed=2)
    scan_ok = (a.labels() == b.labels()
               and all(wa.tobytes() == wb.tobytes()
                       for (_, _, wa), (_, _, wb)
                       in zip(a.patterns, b.patterns)))

    ok = order_ok and rerun_ok and scan_ok
    _report(11, ok, "observed orders %s, rerun identical %s, "
            "seeded scan identical %s" %
            (np.round(orders, 2).tolist(), rerun_ok, scan_ok))
    assert ok
