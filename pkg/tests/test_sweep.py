"""Boundary tracing, homotopies, multistability, and the branch diagram."""

import numpy as np
import pytest

from oechain.analysis import (FIXED_POINT, MIXED, SYNCHRONOUS, UNLOCKED,
                              LockPattern)
from oechain.integrate import IntegratorConfig
from oechain.model import oe_pair, oeeo, oeo
from oechain.sweep import (HomotopyLine, bistability_scan, classification_grid,
                           max_heterogeneity, mirrored_offset,
                           pattern_matcher, pitchfork_diagram,
                           predicate_fires, predicate_fixed_point,
                           trace_boundary, worker_count)

LIGHT = IntegratorConfig(dt=0.005, t_transient=1000.0, t_record=1000.0,
                         sample_every=4)


def test_worker_count_env(monkeypatch):
    monkeypatch.delenv("OECHAIN_WORKERS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("OECHAIN_WORKERS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("OECHAIN_WORKERS", "0")
    assert worker_count() == 1
    monkeypatch.setenv("OECHAIN_WORKERS", "lots")
    assert worker_count() == 1


def test_homotopy_line():
    line = HomotopyLine((0.1, 0.2), (0.5, 0.6), samples=5)
    assert line.point(0.0) == (0.1, 0.2)
    assert line.point(1.0) == pytest.approx((0.5, 0.6))
    assert line.parameter_values().size == 5
    with pytest.raises(ValueError):
        HomotopyLine((0.0, 0.0), (1.0, 1.0), samples=1)


def test_pattern_matcher_reduces_ratio():
    match = pattern_matcher(1, 2)
    assert match(LockPattern(2, 4, MIXED))
    assert match(LockPattern(1, 2, SYNCHRONOUS))
    assert not match(LockPattern(1, 1, SYNCHRONOUS))


def test_pattern_matcher_relation_filter():
    match = pattern_matcher(1, 1, relations=(SYNCHRONOUS,))
    assert match(LockPattern(1, 1, SYNCHRONOUS))
    assert not match(LockPattern(1, 1, MIXED))


def test_pattern_matcher_rejects_unlocked_and_undetermined():
    match = pattern_matcher(1, 1)
    assert not match(LockPattern(1, 1, UNLOCKED))
    assert not match(LockPattern(0, 0, FIXED_POINT))
    assert not match(LockPattern(None, None, SYNCHRONOUS))


def test_trace_boundary_finds_stall_onset():
    # past the saddle-node the pair stalls; onset is at c_eo = (b-1)c_oe
    warm = trace_boundary(lambda a, b: oe_pair(a, b), [1.5],
                          predicate_fixed_point(), (0.0, 0.3), tol=1e-3,
                          config=LIGHT, label="stall")
    assert warm.label == "stall"
    assert warm.points.shape == (1, 2)
    assert warm.points[0, 1] == pytest.approx(0.15, abs=2e-3)
    cold = trace_boundary(lambda a, b: oe_pair(a, b), [1.5],
                          predicate_fixed_point(), (0.0, 0.3), tol=1e-3,
                          config=LIGHT, warm_start=False)
    assert cold.points[0, 1] == pytest.approx(warm.points[0, 1], abs=2e-3)


def test_trace_boundary_skips_flat_columns():
    # below c_oe = omega the pair cannot stall anywhere in the bracket
    curve = trace_boundary(lambda a, b: oe_pair(a, b), [0.5],
                           predicate_fixed_point(), (0.0, 0.3), tol=1e-3,
                           config=LIGHT)
    assert curve.skipped == [0.5]
    assert curve.points.size == 0


def test_predicate_fires_vs_stalled():
    from oechain.sweep import probe
    fires = predicate_fires(1)
    running = probe(oe_pair(0.5, 0.3), config=LIGHT)
    assert fires(running, None)
    stalled = probe(oe_pair(1.5, 0.1), config=LIGHT)
    assert not fires(stalled, None)


def test_max_heterogeneity_flat_line():
    line = HomotopyLine((0.3, 0.3), (0.3, 0.3), samples=2)
    curve = max_heterogeneity(line, lambda a, b, d: oeo(a, b, d=d),
                              pattern_matcher(1, 1), d_bracket=(0.0, 0.4),
                              tol=5e-3, config=LIGHT)
    assert np.isfinite(curve.d_max).all()
    assert curve.d_max[0] == pytest.approx(curve.d_max[1], abs=5e-3)
    assert curve.d_max[0] > 0.02
    assert curve.notes == []


def test_bistability_scan_deterministic():
    spec = oeeo(0.9, 0.16, 0.5)
    a = bistability_scan(spec, n_ic=6, seed=2)
    b = bistability_scan(spec, n_ic=6, seed=2)
    assert a.labels() == b.labels() == ["1:1-s"]
    assert a.fractions() == {(1, 1, SYNCHRONOUS): 1.0}
    assert a.n_ic == 6
    for (_, fa, wa), (_, fb, wb) in zip(a.patterns, b.patterns):
        assert fa == fb
        assert wa.tobytes() == wb.tobytes()


def test_bistability_scan_validates_n_ic():
    with pytest.raises(ValueError):
        bistability_scan(oeo(0.3, 0.3), n_ic=0)


def test_classification_grid_seeded_determinism():
    c_oe = (0.3, 0.5)
    c_eo = (0.3, 0.4)
    a = classification_grid(lambda p, q: oeo(p, q), c_oe, c_eo,
                            config=LIGHT, seed=5)
    b = classification_grid(lambda p, q: oeo(p, q), c_oe, c_eo,
                            config=LIGHT, seed=5)
    assert a.shape == (2, 2)
    assert (a == b).all()


def test_classification_grid_protocol_start():
    grid = classification_grid(lambda p, q: oeo(p, q), (0.3,), (0.3,),
                               config=LIGHT)
    assert grid[0, 0] == "1:1-s"


def test_pitchfork_branch_flags():
    points = pitchfork_diagram(0.78, (0.11, 0.13, 0.15))
    flags = [(p.sync_stable, p.anti_stable) for p in points]
    assert flags == [(True, False), (False, False), (False, True)]
    assert np.isnan(points[0].mixed_offset)
    assert np.isnan(points[2].mixed_offset)
    assert abs(abs(points[1].mixed_offset) - 2.2695) < 0.05


def test_mirrored_runs_give_opposite_offsets():
    a, b = mirrored_offset(0.78, 0.13)
    assert abs(a + b) < 1e-6
    assert abs(abs(a) - 2.2695) < 0.05
