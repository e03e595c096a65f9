"""Conductance-based analogue of the relay chain: Morris-Lecar cells
joined by gap junctions in an O-E-...-E-O line.

Oscillator cells run at applied current 43 uA/cm^2, excitable cells at
39, where an isolated cell has a stable rest state near -32.9 mV. Gap
currents into a cell are g*(V_neighbor - V) with the same directional
gains as the phase chain: g_oe into an end cell, g_eo into the relay
next to it, g_ee between interior relays. Time is in ms, voltage in mV.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .analysis import (ANTI_PHASE, FIXED_POINT, MIXED, SYNCHRONOUS, UNLOCKED,
                       LockPattern, _circular_mean, _isi_period,
                       _ratio_fraction, _stationary_std)
from .integrate import ML_CONFIG, IntegratorConfig, Trajectory, integrate

I_OSCILLATOR = 43.0
I_EXCITABLE = 39.0


@dataclass(frozen=True)
class MLParams:
    """Single-cell constants; only the applied current varies by role."""

    i_app: float
    g_ca: float = 4.0
    g_k: float = 8.0
    g_leak: float = 2.0
    v_ca: float = 120.0
    v_k: float = -84.0
    v_leak: float = -60.0
    phi: float = 0.3
    ca_half: float = -1.2
    ca_slope: float = 18.0
    k_half: float = 12.0
    k_slope: float = 17.4
    tau_scale: float = 34.8

    @property
    def oscillatory(self) -> bool:
        return self.i_app >= I_OSCILLATOR

    def m_inf(self, v):
        return 0.5 * (1.0 + np.tanh((v - self.ca_half) / self.ca_slope))

    def w_inf(self, v):
        return 0.5 * (1.0 + np.tanh((v - self.k_half) / self.k_slope))

    def tau_rate(self, v):
        return np.cosh((v - self.k_half) / self.tau_scale)

    def membrane_current(self, v, w):
        return (self.i_app
                - self.g_ca * self.m_inf(v) * (v - self.v_ca)
                - self.g_k * w * (v - self.v_k)
                - self.g_leak * (v - self.v_leak))


def rest_state(i_app: float = I_EXCITABLE):
    """Stable rest point (V, w) of an isolated cell, by root finding on
    the steady-state current with w = w_inf(V).

    The curve crosses zero up to three times; the lowest crossing is the
    stable rest, so the bracket comes from the first sign change on a
    scan upward from strongly hyperpolarized voltages.
    """
    p = MLParams(i_app)

    def f(v):
        return p.membrane_current(v, p.w_inf(v))

    grid = np.linspace(-80.0, 20.0, 201)
    vals = [f(v) for v in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            v = grid[i]
            break
        if vals[i] * vals[i + 1] < 0.0:
            v = brentq(f, grid[i], grid[i + 1], xtol=1e-12)
            break
    else:
        raise RuntimeError("no rest state found for I=%g" % i_app)
    return float(v), float(p.w_inf(v))


@dataclass(frozen=True)
class MLNetwork:
    """Line of ML cells with directional gap-junction gains.

    currents[i] is the applied current of cell i; the gain arrays follow
    the chain convention: g_prev[i] scales (V[i-1] - V[i]), g_next[i]
    scales (V[i+1] - V[i]).
    """

    currents: tuple
    g_oe: float = 0.0
    g_eo: float = 0.0
    g_ee: float = 0.0

    def __post_init__(self):
        if len(self.currents) < 1:
            raise ValueError("need at least one cell")
        for g in (self.g_oe, self.g_eo, self.g_ee):
            if g < 0.0:
                raise ValueError("conductances must be nonnegative")

    @property
    def n_cells(self) -> int:
        return len(self.currents)

    @property
    def dim(self) -> int:
        return 2 * self.n_cells

    def oscillator_indices(self):
        return tuple(i for i, cur in enumerate(self.currents)
                     if cur >= I_OSCILLATOR)

    def excitable_indices(self):
        return tuple(i for i, cur in enumerate(self.currents)
                     if cur < I_OSCILLATOR)

    def coupling_arrays(self):
        n = self.n_cells
        i_app = np.array(self.currents, dtype=float)
        g_prev = np.zeros(n)
        g_next = np.zeros(n)
        for i in range(n):
            if i > 0:
                g_prev[i] = self._gain(into=i, source=i - 1)
            if i < n - 1:
                g_next[i] = self._gain(into=i, source=i + 1)
        return i_app, g_prev, g_next

    def _gain(self, into: int, source: int) -> float:
        into_osc = self.currents[into] >= I_OSCILLATOR
        source_osc = self.currents[source] >= I_OSCILLATOR
        if into_osc and not source_osc:
            return self.g_oe
        if not into_osc and source_osc:
            return self.g_eo
        if not into_osc and not source_osc:
            return self.g_ee
        return self.g_oe  # O-O contact: only in degenerate two-cell lines

    def vector_field(self, state):
        """Reference right-hand side; the integration kernels must agree
        with this to rounding."""
        state = np.asarray(state, dtype=float)
        if state.size != self.dim:
            raise ValueError("state dimension mismatch")
        i_app, g_prev, g_next = self.coupling_arrays()
        v = state[0::2]
        w = state[1::2]
        p = MLParams(0.0)
        i_mem = (i_app
                 - p.g_ca * p.m_inf(v) * (v - p.v_ca)
                 - p.g_k * w * (v - p.v_k)
                 - p.g_leak * (v - p.v_leak))
        i_coup = np.zeros_like(v)
        i_coup[1:] += g_prev[1:] * (v[:-1] - v[1:])
        i_coup[:-1] += g_next[:-1] * (v[1:] - v[:-1])
        out = np.empty_like(state)
        out[0::2] = i_mem + i_coup
        out[1::2] = p.phi * (p.w_inf(v) - w) * p.tau_rate(v)
        return out


def single_cell(i_app: float) -> MLNetwork:
    return MLNetwork(currents=(i_app,))


def oeeo_network(g_oe: float, g_eo: float, g_ee: float = 0.1) -> MLNetwork:
    """The four-cell line of the conductance-plane scans: O E E O."""
    return MLNetwork(currents=(I_OSCILLATOR, I_EXCITABLE,
                               I_EXCITABLE, I_OSCILLATOR),
                     g_oe=g_oe, g_eo=g_eo, g_ee=g_ee)


def ml_vector_field(network: MLNetwork, state):
    return network.vector_field(state)


def default_ml_ic(network: MLNetwork, rng) -> np.ndarray:
    """Random voltages over the spiking range, gates low."""
    ic = np.empty(network.dim)
    ic[0::2] = rng.uniform(-70.0, 30.0, network.n_cells)
    ic[1::2] = rng.uniform(0.0, 0.5, network.n_cells)
    return ic


def symmetric_ml_ic(network: MLNetwork, kick: float = 0.0) -> np.ndarray:
    """End-symmetric start: relays at rest, ends depolarized by kick."""
    vr, wr = rest_state(I_EXCITABLE)
    ic = np.empty(network.dim)
    ic[0::2] = vr
    ic[1::2] = wr
    for i in (0, network.n_cells - 1):
        ic[2 * i] = vr + kick
    return ic


def ml_classify(network: MLNetwork, traj: Trajectory, tol_sync: float = 0.05,
                mixed_std: float = 0.02, max_denominator: int = 8,
                refine_repeat_unit: bool = True) -> LockPattern:
    """Same decision rules as the phase classifier, driven by spike times.

    Firings are V=0 upward crossings. The oscillator relation comes from
    the lag of the nearest far-end spike behind one near-end spike per
    repeat unit, normalized by the repeat-unit period; this keeps the
    sampled offset constant on a locked orbit whatever the ratio.
    """
    o_cells = network.oscillator_indices()
    e_cells = network.excitable_indices()
    if len(o_cells) < 2:
        raise ValueError("classification needs oscillators at both ends")
    sx = traj.firings[o_cells[0]]
    sz = traj.firings[o_cells[-1]]
    if sx.size < 2 and sz.size < 2:
        return LockPattern(0, 0, FIXED_POINT)

    n_o = max(sx.size, sz.size)
    n_e = max((traj.firings[c].size for c in e_cells), default=0)
    if n_o < 2 * max_denominator:
        raise ValueError("window too short: %d oscillator cycles" % n_o)
    if sx.size < 2 or sz.size < 2:
        return LockPattern(0, 0, UNLOCKED)

    frac = _ratio_fraction(n_e, n_o, max_denominator)
    if frac is None:
        return LockPattern(0, 0, UNLOCKED)
    p, q = frac.numerator, frac.denominator

    if refine_repeat_unit:
        k = 1
        p_isi = _isi_period(np.diff(sx if sx.size >= sz.size else sz))
        if p_isi > 0 and p_isi % q == 0:
            k = p_isi // q
        p, q = p * k, q * k

    isi = float(np.mean(np.diff(sx)))
    unit = q * isi
    refs = sx[::q]
    lags = np.empty(refs.size)
    for i, t in enumerate(refs):
        j = int(np.argmin(np.abs(sz - t)))
        d = sz[j] - t
        lags[i] = d - unit * round(d / unit)
    theta = 2.0 * math.pi * lags / unit
    mu = _circular_mean(theta)
    spread = _stationary_std(theta, mu)

    if spread > 0.3:
        return LockPattern(p, q, UNLOCKED, mu)
    if abs(mu) < tol_sync and spread < tol_sync:
        return LockPattern(p, q, SYNCHRONOUS, 0.0 if mu == 0 else mu)
    if abs(abs(mu) - math.pi) < tol_sync and spread < tol_sync:
        return LockPattern(p, q, ANTI_PHASE, mu)
    if spread < mixed_std:
        return LockPattern(p, q, MIXED, mu)
    return LockPattern(p, q, UNLOCKED, mu)


def run_ml(network: MLNetwork, initial_state,
           config: IntegratorConfig = None) -> Trajectory:
    if config is None:
        config = ML_CONFIG
    return integrate(network, initial_state, config)


# Initial-condition protocols that select the states marked on the
# conductance-plane scan; derived by basin search, frozen for
# reproducibility. Keys are (g_oe, g_eo) with g_ee = 0.1.
MARKED_POINT_ICS = {
    (0.4, 0.05): np.array([10.0, 0.2, -33.0, 0.006, -33.0, 0.006,
                           -60.0, 0.01]),
    (0.5, 0.057): np.array([10.0, 0.2, -33.0, 0.006, -33.0, 0.006,
                            -25.0, 0.3]),
    (0.63, 0.05): np.array([-26.0, 0.1, -33.0, 0.006, -33.0, 0.006,
                            -26.0, 0.15]),
    (0.1, 0.065): None,  # symmetric protocol: symmetric_ml_ic(kick=30)
}


def marked_point_ic(g_oe: float, g_eo: float) -> np.ndarray:
    key = (g_oe, g_eo)
    if key not in MARKED_POINT_ICS:
        raise KeyError("no frozen protocol for (%g, %g)" % key)
    ic = MARKED_POINT_ICS[key]
    if ic is None:
        return symmetric_ml_ic(oeeo_network(g_oe, g_eo), kick=30.0)
    return ic.copy()


def ml_region_scan(g_oe_values, g_eo_values, g_ee: float = 0.1,
                   n_ic: int = 4, seed: int = 0,
                   config: IntegratorConfig = None):
    """Label a conductance grid by the set of attractors found from
    seeded random starts; multistable points get joined labels."""
    from .sweep import bistability_scan

    if config is None:
        config = ML_CONFIG
    labels = np.empty((len(g_eo_values), len(g_oe_values)), dtype=object)
    sets = {}
    for ie, g_eo in enumerate(g_eo_values):
        for io, g_oe in enumerate(g_oe_values):
            net = oeeo_network(g_oe, g_eo, g_ee)
            aset = bistability_scan(
                MLSystemAdapter(net), n_ic=n_ic, seed=seed, config=config,
                classifier=lambda traj, net=net: ml_classify(net, traj),
                ic_sampler=lambda rng, net=net: default_ml_ic(net, rng))
            found = sorted(set(aset.labels()))
            labels[ie, io] = "+".join(found)
            sets[(float(g_oe), float(g_eo))] = aset
    return labels, sets


class MLSystemAdapter:
    """Duck-typed stand-in so sweep.bistability_scan can drive an ML
    network: exposes the fields the scan reads and forwards integration
    through coupling_arrays."""

    def __init__(self, network: MLNetwork):
        self.network = network
        self.c_oe = network.g_oe
        self.c_eo = network.g_eo
        self.c_ee = network.g_ee
        self.n_excitable = len(network.excitable_indices())
        self.d = 0.0
        self.dim = network.dim

    def coupling_arrays(self):
        return self.network.coupling_arrays()

    def vector_field(self, state):
        return self.network.vector_field(state)
