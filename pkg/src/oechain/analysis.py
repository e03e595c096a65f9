"""Diagnostics on trajectories: rotation numbers, n:m locking labels with
oscillator phase relation, and the largest Lyapunov exponent.

Locking classification counts firings per repeat unit of the orbit and
reads the oscillator relation from the end-to-end phase offset sampled at
oscillator firing events. The relation vocabulary follows the region
labels: synchronous, anti-phase, mixed, unlocked, fixed-point.
"""

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import kernels
from .integrate import IntegratorConfig, Trajectory, integrate
from .model import ChainSpec, oe_pair

TWO_PI = 2.0 * math.pi

SYNCHRONOUS = "synchronous"
ANTI_PHASE = "anti-phase"
MIXED = "mixed"
UNLOCKED = "unlocked"
FIXED_POINT = "fixed-point"

_SUFFIX = {SYNCHRONOUS: "s", ANTI_PHASE: "a", MIXED: "m"}


@dataclass(frozen=True)
class LockPattern:
    """n excitable firings to m oscillator firings per repeat unit.

    n and m are None when the oscillators hold a stationary relation but
    the excitable firing rate is incommensurate with them, which happens
    on quasi-periodic in-manifold attractors.
    """

    n: int
    m: int
    relation: str
    phase_difference: float = math.nan

    def label(self) -> str:
        """Compact region label, e.g. '0:1-s', '2:4-m', 'unlocked'."""
        if self.relation == FIXED_POINT:
            return "0:0"
        if self.relation == UNLOCKED:
            return UNLOCKED
        if self.n is None:
            return "~:~-%s" % _SUFFIX[self.relation]
        return "%d:%d-%s" % (self.n, self.m, _SUFFIX[self.relation])

    def reduced(self) -> "LockPattern":
        if self.n is None:
            return self
        g = math.gcd(self.n, self.m)
        if g <= 1:
            return self
        return replace(self, n=self.n // g, m=self.m // g)

    def key(self) -> tuple:
        return (self.n, self.m, self.relation)


@dataclass(frozen=True)
class RotationEstimate:
    """Firing-rate ratio rho = winding(y) / winding(x) with an uncertainty
    half_width taken from the last-quarter versus full-window discrepancy."""

    rho: float
    half_width: float
    converged: bool
    fixed_point: bool = False


def _winding_ratio(x, y):
    dx = x[-1] - x[0]
    dy = y[-1] - y[0]
    return dy / dx if dx != 0.0 else math.nan


def rotation_number(spec: ChainSpec, horizon: float = 5000.0,
                    t_transient: float = 500.0, tol: float = 1e-3,
                    dt: float = 0.005, initial_state=None,
                    cell: int = 1) -> RotationEstimate:
    """Rotation number of excitable cell `cell` against the x oscillator."""
    config = IntegratorConfig(dt=dt, t_transient=t_transient,
                              t_record=horizon - t_transient, sample_every=20)
    if initial_state is None:
        initial_state = _protocol_ic(spec)
    traj = integrate(spec, initial_state, config)
    x = traj.states[:, 0]
    y = traj.states[:, cell]
    if x[-1] - x[len(x) // 2] < TWO_PI:
        return RotationEstimate(rho=math.nan, half_width=math.inf,
                                converged=False, fixed_point=True)
    rho = _winding_ratio(x, y)
    q = 3 * len(x) // 4
    rho_q = _winding_ratio(x[q:], y[q:])
    half_width = abs(rho - rho_q)
    return RotationEstimate(rho=rho, half_width=half_width,
                            converged=half_width < tol)


def _protocol_ic(spec: ChainSpec) -> np.ndarray:
    """Fixed initial-condition protocol: oscillators staggered, excitable
    cells at rest (or at 0 when not excitable)."""
    ic = np.zeros(spec.dim)
    ic[0] = 0.3
    y0 = -math.acos(1.0 / spec.b) if spec.b > 1.0 else 0.0
    for j in spec.excitable_indices():
        ic[j] = y0
    if spec.has_z:
        ic[-1] = 1.1
    return ic


def _wrap(a):
    return (np.asarray(a) + math.pi) % TWO_PI - math.pi


def _circular_mean(samples):
    return math.atan2(np.sin(samples).mean(), np.cos(samples).mean())


def _stationary_std(samples, mu):
    dev = _wrap(np.asarray(samples) - mu)
    half = dev[len(dev) // 2:]
    return float(np.std(half)) if half.size else math.inf


def _isi_period(isi, max_period=6, rel_tol=0.02):
    """Smallest p such that the interval sequence is p-periodic."""
    isi = np.asarray(isi)
    if isi.size < 4:
        return 1
    scale = isi.mean()
    for p in range(1, max_period + 1):
        if isi.size < 2 * p:
            break
        ok = True
        for k in range(p):
            seg = isi[k::p]
            if seg.size >= 2 and (seg.max() - seg.min()) > rel_tol * scale:
                ok = False
                break
        if ok:
            return p
    return 0


def _ratio_fraction(n_e, n_o, max_denominator=8):
    """Nearest small-denominator ratio, allowing one firing of slack for
    events truncated at the window edges."""
    r = n_e / n_o
    frac = Fraction(r).limit_denominator(max_denominator)
    if abs(n_e * frac.denominator - frac.numerator * n_o) > frac.denominator:
        return None
    return frac


def _repeat_unit_multiplier(o_events, e_events, q):
    """Detect period-doubled orbits from interval-sequence periodicity."""
    k = 1
    p_o = _isi_period(np.diff(o_events))
    if p_o > 0 and p_o % q == 0:
        k = max(k, p_o // q)
    if e_events.size >= 6:
        p_e = _isi_period(np.diff(e_events))
        n_red = max(1, int(round(q * (e_events.size / max(o_events.size, 1)))))
        if p_e > 0 and p_e % max(n_red, 1) == 0:
            k = max(k, p_e // max(n_red, 1))
    return k


def classify_locking(traj: Trajectory, spec: ChainSpec, tol_sync: float = 0.05,
                     mixed_std: float = 0.02, max_denominator: int = 8,
                     refine_repeat_unit: bool = False) -> LockPattern:
    """Label the attractor of a recorded two-oscillator chain trajectory.

    The firing ratio n:m counts excitable against oscillator events per
    repeat unit. The relation comes from the end-to-end locking residual
    (x - z for equal end rates, else the winding-weighted combination)
    sampled once per repeat unit at each oscillator's firings: mean 0 is
    synchronous, pi anti-phase, any other stationary value mixed, and a
    drifting residual unlocked.
    """
    if not spec.has_z:
        raise ValueError("classification needs both end oscillators")
    o_cells = spec.oscillator_indices()
    e_cells = spec.excitable_indices()
    x = traj.states[:, 0]
    z = traj.states[:, -1]

    half = len(x) // 2
    wind_x = x[-1] - x[half]
    wind_z = z[-1] - z[half]
    if wind_x < TWO_PI and wind_z < TWO_PI:
        return LockPattern(0, 0, FIXED_POINT)

    o_counts = [traj.firings[c].size for c in o_cells]
    e_counts = [traj.firings[c].size for c in e_cells]
    n_o = max(o_counts)
    n_e = max(e_counts)
    if n_o < 2 * max_denominator:
        raise ValueError("window too short: %d oscillator cycles" % n_o)

    # an incommensurate excitable rate does not preclude a stationary
    # oscillator relation, so the ratio may stay undetermined
    frac = _ratio_fraction(n_e, n_o, max_denominator)
    if frac is None:
        p, q = None, None
    else:
        p, q = frac.numerator, frac.denominator
        if refine_repeat_unit:
            o_ref = traj.firings[o_cells[int(np.argmax(o_counts))]]
            e_ref = traj.firings[e_cells[int(np.argmax(e_counts))]]
            k = _repeat_unit_multiplier(o_ref, e_ref, q)
            p, q = p * k, q * k

    if wind_x < TWO_PI or wind_z < TWO_PI:
        return LockPattern(p, q, UNLOCKED)

    # rational relation between the end windings; (1,1) is the common case
    ends = _ratio_fraction(traj.firings[o_cells[0]].size,
                           traj.firings[o_cells[-1]].size, max_denominator)
    if ends is None:
        return LockPattern(p, q, UNLOCKED)
    px, qz = ends.numerator, ends.denominator
    equal_rates = (px, qz) == (1, 1)
    w = qz * x - px * z if not equal_rates else x - z
    drift = abs(_fitted_drift(traj.times, w))
    if drift > math.pi * max(px, qz):
        return LockPattern(p, q, UNLOCKED)

    # one sample per repeat unit and per oscillator keeps the sampled
    # residual constant on a locked orbit whatever the firing pattern
    n_units = max(1, int(round(n_o / (q or 1))))
    samples = []
    stds = []
    for c in o_cells:
        events = traj.firings[c]
        if events.size == 0:
            continue
        stride = max(1, int(round(events.size / n_units)))
        s = np.interp(events[::stride], traj.times, w)
        if abs(_fitted_drift(np.arange(s.size, dtype=float), s)) > math.pi:
            return LockPattern(p, q, UNLOCKED)
        mu_c = _circular_mean(s)
        stds.append(_stationary_std(s, mu_c))
        samples.append(s)
    mu = _circular_mean(np.concatenate(samples))
    spread = max(stds)

    if equal_rates and abs(mu) < tol_sync and spread < tol_sync:
        return LockPattern(p, q, SYNCHRONOUS, 0.0 if mu == 0 else mu)
    if equal_rates and abs(abs(mu) - math.pi) < tol_sync and spread < tol_sync:
        return LockPattern(p, q, ANTI_PHASE, mu)
    if spread < mixed_std:
        return LockPattern(p, q, MIXED, mu)
    return LockPattern(p, q, UNLOCKED, mu)


def _fitted_drift(t, w):
    """Linear-trend change of w over the window."""
    tc = t - t.mean()
    denom = float(tc @ tc)
    if denom == 0.0:
        return 0.0
    slope = float(tc @ (w - w.mean())) / denom
    return slope * (t[-1] - t[0])


@dataclass(frozen=True)
class LyapunovEstimate:
    lam: float
    stderr: float
    n_intervals: int


def _stepper(system):
    """(advance(state, dt, n_steps), dimension) for a chain or ML system."""
    if isinstance(system, ChainSpec):
        wx, wz = system.end_frequencies
        args = (wx, wz, system.b, system.c_oe, system.c_eo, system.c_ee,
                system.has_z)

        def advance(s, dt, n):
            kernels.chain_rk4(s, dt, n, *args)

        return advance, system.dim
    arrays = system.coupling_arrays()

    def advance(s, dt, n):
        kernels.ml_rk4(s, dt, n, *arrays)

    return advance, 2 * arrays[0].shape[0]


def lyapunov_exponent(system, initial_state=None, t_transient: float = 500.0,
                      t_window: float = 2000.0, delta0: float = 1e-8,
                      renorm_dt: float = 1.0, dt: float = 0.005) -> LyapunovEstimate:
    """Largest Lyapunov exponent by two-trajectory renormalization.

    A companion trajectory is seeded delta0 away after the transient and
    renormalized back to distance delta0 every renorm_dt time units; the
    exponent is the mean log stretching rate, with a standard error from
    the spread of the four window-quarter means.
    """
    advance, dim = _stepper(system)
    if initial_state is None:
        if isinstance(system, ChainSpec):
            initial_state = _protocol_ic(system)
        else:
            raise ValueError("initial_state required for ML systems")
    base = np.array(initial_state, dtype=float)
    advance(base, dt, int(round(t_transient / dt)))
    comp = base + delta0 / math.sqrt(dim)
    n_sub = int(round(renorm_dt / dt))
    n_int = int(round(t_window / renorm_dt))
    logs = np.empty(n_int)
    for i in range(n_int):
        advance(base, dt, n_sub)
        advance(comp, dt, n_sub)
        diff = comp - base
        dist = math.sqrt(float(diff @ diff))
        if not math.isfinite(dist) or dist == 0.0:
            raise RuntimeError("separation degenerate during Lyapunov run")
        logs[i] = math.log(dist / delta0) / renorm_dt
        comp = base + diff * (delta0 / dist)
    quarters = logs[: 4 * (n_int // 4)].reshape(4, -1).mean(axis=1)
    return LyapunovEstimate(lam=float(logs.mean()),
                            stderr=float(np.std(quarters)) / 2.0,
                            n_intervals=n_int)


def reduced_pair(spec: ChainSpec) -> ChainSpec:
    """Restriction of a symmetric chain to its synchrony manifold.

    Setting x=z and mirroring the excitable cells collapses the chain onto
    an oscillator-excitable pair: the single relay cell then receives its
    oscillator input twice (c_eo doubled), while for two relay cells the
    mutual c_ee terms cancel and c_eo is unchanged.
    """
    if spec.d != 0.0 or spec.omega_x is not None or spec.omega_z is not None:
        raise ValueError("synchrony manifold requires identical oscillators")
    if not spec.has_z:
        raise ValueError("spec already is a pair")
    if spec.n_excitable == 1:
        c_eo = 2.0 * spec.c_eo
    elif spec.n_excitable == 2:
        c_eo = spec.c_eo
    else:
        raise ValueError("manifold reduction implemented for 1 or 2 relay cells")
    return oe_pair(c_oe=spec.c_oe, c_eo=c_eo, b=spec.b, omega=spec.omega)


def synchrony_manifold_run(spec: ChainSpec, horizon: float = 5000.0,
                           t_transient: float = 500.0, dt: float = 0.005):
    """Integrate the synchrony-manifold restriction; return its trajectory
    and rotation estimate."""
    pair = reduced_pair(spec)
    config = IntegratorConfig(dt=dt, t_transient=t_transient,
                              t_record=horizon - t_transient, sample_every=20)
    traj = integrate(pair, _protocol_ic(pair), config)
    x = traj.states[:, 0]
    y = traj.states[:, 1]
    rho = _winding_ratio(x, y)
    qi = 3 * len(x) // 4
    half_width = abs(rho - _winding_ratio(x[qi:], y[qi:]))
    est = RotationEstimate(rho=rho, half_width=half_width,
                           converged=half_width < 1e-3)
    return traj, est


def protocol_ic(spec: ChainSpec) -> np.ndarray:
    """Public fixed initial-condition protocol used by sweeps."""
    return _protocol_ic(spec)


def random_ic(spec_dim: int, rng) -> np.ndarray:
    """Uniform draw on the torus."""
    return rng.uniform(0.0, TWO_PI, spec_dim)
