"""Rotation numbers, locking labels, and Lyapunov estimates.

The classifier tests run on hand-built trajectories where the right label
is known by construction; rotation numbers are checked against values
frozen from long reference runs.
"""

import math

import numpy as np
import pytest

from oechain.analysis import (ANTI_PHASE, FIXED_POINT, MIXED, SYNCHRONOUS,
                              UNLOCKED, LockPattern, _isi_period,
                              _ratio_fraction, classify_locking,
                              lyapunov_exponent, random_ic, reduced_pair,
                              rotation_number)
from oechain.integrate import Trajectory
from oechain.model import chain, oe_pair, oeeo, oeo

TWO_PI = 2.0 * math.pi
REST = -math.acos(1.0 / 1.1)


def test_lock_pattern_labels():
    assert LockPattern(1, 1, SYNCHRONOUS).label() == "1:1-s"
    assert LockPattern(2, 4, MIXED).label() == "2:4-m"
    assert LockPattern(0, 1, ANTI_PHASE).label() == "0:1-a"
    assert LockPattern(0, 0, FIXED_POINT).label() == "0:0"
    assert LockPattern(1, 1, UNLOCKED).label() == "unlocked"
    assert LockPattern(None, None, SYNCHRONOUS).label() == "~:~-s"


def test_lock_pattern_reduced_and_key():
    p = LockPattern(2, 4, MIXED, 0.3)
    r = p.reduced()
    assert (r.n, r.m) == (1, 2)
    assert r.phase_difference == 0.3
    assert LockPattern(1, 2, MIXED).reduced().key() == (1, 2, MIXED)
    q = LockPattern(None, None, SYNCHRONOUS)
    assert q.reduced() is q


def test_rotation_number_frozen_values():
    r = rotation_number(oe_pair(0.5, 0.3))
    assert r.converged and not r.fixed_point
    assert r.rho == pytest.approx(0.6365922788781986, abs=1e-9)
    r = rotation_number(oe_pair(0.99, 0.2))
    assert r.converged
    assert r.rho == pytest.approx(0.9993435167950017, abs=1e-9)


def test_rotation_number_near_locking_does_not_converge():
    r = rotation_number(oe_pair(0.5, 0.45))
    assert not r.converged
    assert abs(r.rho - 1.0) < 1e-3


def test_rotation_number_detects_fixed_point():
    assert rotation_number(oe_pair(1.5, 0.1)).fixed_point
    r = rotation_number(oe_pair(1.5, 0.2))
    assert not r.fixed_point
    assert r.rho == pytest.approx(1.0, abs=1e-3)


def _synthetic(x, y, z, t):
    return Trajectory(times=t, states=np.column_stack([x, y, z]))


_SPEC = oeo(0.5, 0.3)
_T = np.arange(0.0, 20 * TWO_PI, 0.02)


def test_classify_synchronous():
    pat = classify_locking(_synthetic(_T, _T, _T, _T), _SPEC)
    assert pat.key() == (1, 1, SYNCHRONOUS)
    assert abs(pat.phase_difference) < 1e-9


def test_classify_slow_drift_is_unlocked():
    # ends differ by one firing over the window, which the ratio tolerates,
    # but the fitted residual drift exceeds pi
    pat = classify_locking(_synthetic(_T, _T, 0.97 * _T, _T), _SPEC)
    assert pat.relation == UNLOCKED


def test_classify_anti_phase_with_silent_relay():
    y = np.full_like(_T, REST)
    pat = classify_locking(_synthetic(_T, y, _T + math.pi, _T), _SPEC)
    assert pat.label() == "0:1-a"
    assert abs(abs(pat.phase_difference) - math.pi) < 1e-9


def test_classify_mixed_offset():
    y = np.full_like(_T, REST)
    pat = classify_locking(_synthetic(_T, y, _T + 2.0, _T), _SPEC)
    assert pat.label() == "0:1-m"
    assert abs(abs(pat.phase_difference) - 2.0) < 1e-9


def test_classify_fixed_point():
    flat = np.full_like(_T, 0.4)
    y = np.full_like(_T, REST)
    pat = classify_locking(_synthetic(flat, y, flat, _T), _SPEC)
    assert pat.label() == "0:0"


def test_classify_two_to_one():
    pat = classify_locking(_synthetic(_T, 2.0 * _T, _T, _T), _SPEC)
    assert pat.label() == "2:1-s"


def test_classify_incommensurate_relay_rate():
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    t = np.arange(0.0, 351 * TWO_PI, 0.05)
    pat = classify_locking(_synthetic(t, phi * t, t, t), _SPEC)
    assert pat.label() == "~:~-s"
    assert pat.n is None and pat.m is None


def test_classify_short_window_raises():
    # winds enough to rule out a fixed point, but too few firings to count
    t = np.arange(0.0, 5 * TWO_PI, 0.02)
    with pytest.raises(ValueError, match="window too short"):
        classify_locking(_synthetic(t, t, t, t), _SPEC)


def test_classify_needs_both_ends():
    t = _T
    traj = Trajectory(times=t, states=np.column_stack([t, t]))
    with pytest.raises(ValueError):
        classify_locking(traj, oe_pair(0.5, 0.3))


def test_isi_period():
    assert _isi_period(np.array([1.0] * 10)) == 1
    assert _isi_period(np.array([1.0, 2.0] * 8)) == 2
    assert _isi_period(np.array([1.0, 1.3, 1.9] * 6)) == 3
    rng = np.random.default_rng(0)
    assert _isi_period(rng.uniform(1.0, 2.0, 30)) == 0
    assert _isi_period(np.array([1.0, 2.0])) == 1


def test_ratio_fraction_slack():
    frac = _ratio_fraction(233, 351)
    assert (frac.numerator, frac.denominator) == (2, 3)
    assert _ratio_fraction(231, 351) is None
    assert _ratio_fraction(0, 40) == 0


def test_lyapunov_zero_on_limit_cycle():
    est = lyapunov_exponent(oeeo(0.78, 0.15, 0.5), t_transient=200.0,
                            t_window=500.0)
    assert abs(est.lam) < 5e-3
    assert est.n_intervals == 500


def test_reduced_pair_doubles_single_relay_feedback():
    pair = reduced_pair(oeo(0.4, 0.15))
    assert not pair.has_z
    assert pair.c_eo == pytest.approx(0.3)
    assert pair.c_oe == pytest.approx(0.4)


def test_reduced_pair_keeps_two_relay_feedback():
    pair = reduced_pair(oeeo(0.4, 0.15, 0.5))
    assert pair.c_eo == pytest.approx(0.15)
    assert pair.c_ee == 0.0


def test_reduced_pair_rejects_asymmetry():
    with pytest.raises(ValueError):
        reduced_pair(oeo(0.4, 0.15, d=0.1))
    with pytest.raises(ValueError):
        reduced_pair(oe_pair(0.4, 0.15))
    with pytest.raises(ValueError):
        reduced_pair(chain(3, 0.4, 0.15, 0.2))


def test_random_ic_range():
    draw = random_ic(100, np.random.default_rng(3))
    assert draw.shape == (100,)
    assert draw.min() >= 0.0 and draw.max() < TWO_PI
