"""Time stepping, event detection, and Poincare sections.

The default integrator is fixed-step classical RK4 through the backend
kernels; runs are then bit-reproducible for a given backend. An adaptive
embedded 4(5) mode (scipy's RK45) exists for cross-checks. States are
recorded only after the transient interval, every sample_every steps.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .model import ChainSpec, chain_vector_field

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    dt: float = 0.005
    t_transient: float = 0.0
    t_record: float = 1000.0
    sample_every: int = 1
    atol: float = 1e-9
    rtol: float = 1e-8

    def __post_init__(self):
        if self.method not in ("rk4", "rk45"):
            raise ValueError("method must be 'rk4' or 'rk45'")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_transient < 0 or self.t_record < 0:
            raise ValueError("t_transient and t_record must be nonnegative")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.atol <= 0 or self.rtol <= 0:
            raise ValueError("tolerances must be positive")


ML_CONFIG = IntegratorConfig(dt=0.01, t_transient=1000.0, t_record=4000.0,
                             sample_every=4)


@dataclass
class Trajectory:
    """Recorded run: times, states, and per-cell firing event times.

    kind is "phase" (columns are unwrapped phases) or "ml" (columns
    alternate V, w per cell). firings[i] holds the event times of cell i:
    upward crossings of pi + 2*pi*k for phases, upward crossings of V = 0
    for ML cells.
    """

    times: np.ndarray
    states: np.ndarray
    kind: str = "phase"
    firings: tuple = field(default=None)

    def __post_init__(self):
        if self.firings is None:
            self.firings = tuple(detect_firings(self, i)
                                 for i in range(self.n_cells))

    @property
    def n_cells(self) -> int:
        return self.states.shape[1] // (2 if self.kind == "ml" else 1)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    def cell_series(self, cell: int) -> np.ndarray:
        """Phase of cell (phase kind) or voltage of cell (ml kind)."""
        col = cell if self.kind == "phase" else 2 * cell
        return self.states[:, col]


def _upward_level_crossings(t, y, level, period=None):
    """Interpolated times where y crosses level (mod period) upward."""
    if period is None:
        above = y >= level
        idx = np.nonzero(~above[:-1] & above[1:])[0]
        targets = np.full(idx.shape, float(level))
    else:
        lev = np.floor((y - level) / period)
        idx = np.nonzero(np.diff(lev) > 0)[0]
        targets = (lev[idx] + 1.0) * period + level
    if idx.size == 0:
        return np.empty(0)
    frac = (targets - y[idx]) / (y[idx + 1] - y[idx])
    return t[idx] + frac * (t[idx + 1] - t[idx])


def detect_firings(traj: Trajectory, cell: int) -> np.ndarray:
    """Event times of one cell over the recorded window."""
    if cell < 0 or cell >= traj.n_cells:
        raise IndexError("cell index out of range")
    if traj.kind == "phase":
        return _upward_level_crossings(traj.times, traj.states[:, cell],
                                       math.pi, period=TWO_PI)
    return _upward_level_crossings(traj.times, traj.states[:, 2 * cell], 0.0)


def _resolve_steps(config: IntegratorConfig):
    n_tr = int(round(config.t_transient / config.dt))
    n_rec = int(round(config.t_record / config.dt))
    n_rec -= n_rec % config.sample_every
    if n_rec <= 0:
        raise ValueError("t_record too short for the sampling stride")
    return n_tr, n_rec


def integrate(system, initial_state, config: IntegratorConfig) -> Trajectory:
    """Advance system from initial_state; record after the transient.

    system is a ChainSpec or an ML network (anything exposing
    coupling_arrays() returning (i_app, g_prev, g_next)).
    """
    s = np.array(initial_state, dtype=float)
    is_chain = isinstance(system, ChainSpec)
    if is_chain:
        if s.shape != (system.dim,):
            raise ValueError("initial state dimension %d, expected %d"
                             % (s.size, system.dim))
        wx, wz = system.end_frequencies
        args = (wx, wz, system.b, system.c_oe, system.c_eo, system.c_ee,
                system.has_z)
        advance, trace = kernels.chain_rk4, kernels.chain_rk4_trace
        kind = "phase"
    else:
        args = system.coupling_arrays()
        if s.shape != (2 * args[0].shape[0],):
            raise ValueError("initial state dimension %d, expected %d"
                             % (s.size, 2 * args[0].shape[0]))
        advance, trace = kernels.ml_rk4, kernels.ml_rk4_trace
        kind = "ml"

    n_tr, n_rec = _resolve_steps(config)
    if config.method == "rk45":
        return _integrate_rk45(system, s, config, n_tr, n_rec, kind)

    if n_tr:
        advance(s, config.dt, n_tr, *args)
    n_samp = n_rec // config.sample_every + 1
    out = np.empty((n_samp, s.size))
    trace(s, config.dt, n_rec, config.sample_every, out, *args)
    if not np.isfinite(out[-1]).all():
        raise RuntimeError("non-finite state during integration "
                           "(check parameters)")
    times = n_tr * config.dt + np.arange(n_samp) * (config.dt * config.sample_every)
    return Trajectory(times=times, states=out, kind=kind)


def _integrate_rk45(system, s, config, n_tr, n_rec, kind):
    from scipy.integrate import solve_ivp

    if kind == "phase":
        def rhs(_t, y):
            return chain_vector_field(system, y)
    else:
        def rhs(_t, y):
            return system.vector_field(y)

    t0 = n_tr * config.dt
    t1 = t0 + n_rec * config.dt
    n_samp = n_rec // config.sample_every + 1
    t_eval = t0 + np.arange(n_samp) * (config.dt * config.sample_every)
    if n_tr:
        pre = solve_ivp(rhs, (0.0, t0), s, method="RK45",
                        rtol=config.rtol, atol=config.atol, dense_output=False)
        if not pre.success:
            raise RuntimeError("adaptive transient failed: " + pre.message)
        s = pre.y[:, -1]
    sol = solve_ivp(rhs, (t0, t1), s, method="RK45", t_eval=t_eval,
                    rtol=config.rtol, atol=config.atol)
    if not sol.success:
        raise RuntimeError("adaptive integration failed: " + sol.message)
    return Trajectory(times=sol.t.copy(), states=sol.y.T.copy(), kind=kind)


def poincare_section(traj: Trajectory, coord: int, level: float,
                     monotone_tol: float = 1e-9):
    """States at interpolated crossings of coordinate = level (mod 2*pi).

    Returns (crossing times, other-coordinate rows wrapped to [0, 2*pi)).
    Intended for oscillator phases, which should be monotone; if the chosen
    coordinate retreats, a warning is issued and crossings are still
    reported.
    """
    y = traj.states[:, coord]
    if np.any(np.diff(y) < -monotone_tol):
        warnings.warn("section coordinate %d is not monotone" % coord)
    t_cross = _upward_level_crossings(traj.times, y, level, period=TWO_PI)
    others = [c for c in range(traj.states.shape[1]) if c != coord]
    pts = np.empty((t_cross.size, len(others)))
    for k, c in enumerate(others):
        pts[:, k] = np.interp(t_cross, traj.times, traj.states[:, c])
    return t_cross, np.mod(pts, TWO_PI)
