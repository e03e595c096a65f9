"""Phase-chain system definitions.

A chain is two phase oscillators (x at one end, z at the other) relayed
through N excitable cells y_1..y_N. Each excitable cell follows
dy/dt = 1 - b*cos(y); for b > 1 it has a rest state y- = -arccos(1/b) and a
firing threshold y+ = +arccos(1/b). Cells interact through sines of phase
differences with three gains: c_oe into an oscillator from its neighbor
excitable cell, c_eo into an end excitable cell from its oscillator, and
c_ee between adjacent excitable cells.

Phases are kept unwrapped so winding numbers and firing counts are direct;
every coupling term only sees differences, which need no wrapping.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class ExcitableParams:
    """Excitability parameter of a single cell, dy/dt = 1 - b*cos(y)."""

    b: float

    def __post_init__(self):
        if self.b < 0:
            raise ValueError("b must be nonnegative")

    def is_excitable(self) -> bool:
        return self.b > 1.0

    @property
    def rest(self) -> float:
        """Stable equilibrium y- (requires b > 1)."""
        if not self.is_excitable():
            raise ValueError("rest state requires b > 1")
        return -math.acos(1.0 / self.b)

    @property
    def threshold(self) -> float:
        """Unstable equilibrium y+ (requires b > 1)."""
        return -self.rest


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of one oscillator-excitable chain.

    has_z=False drops the far oscillator, leaving the one-oscillator pair
    used for the rotation-number experiments. omega_x/omega_z, when given,
    override omega +/- d (the long-chain runs state end frequencies
    directly).
    """

    c_oe: float
    c_eo: float
    c_ee: float = 0.0
    n_excitable: int = 1
    b: float = 1.1
    omega: float = 1.0
    d: float = 0.0
    has_z: bool = True
    omega_x: Optional[float] = None
    omega_z: Optional[float] = None

    def __post_init__(self):
        for name in ("c_oe", "c_eo", "c_ee"):
            if getattr(self, name) < 0:
                raise ValueError(name + " must be nonnegative")
        if self.n_excitable < 1:
            raise ValueError("n_excitable must be >= 1")
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.d < 0:
            raise ValueError("d must be nonnegative")

    @property
    def dim(self) -> int:
        return self.n_excitable + (2 if self.has_z else 1)

    @property
    def end_frequencies(self) -> tuple:
        wx = self.omega + self.d if self.omega_x is None else self.omega_x
        wz = self.omega - self.d if self.omega_z is None else self.omega_z
        return wx, wz

    @property
    def excitable(self) -> ExcitableParams:
        return ExcitableParams(self.b)

    def oscillator_indices(self) -> tuple:
        return (0, self.dim - 1) if self.has_z else (0,)

    def excitable_indices(self) -> tuple:
        return tuple(range(1, self.n_excitable + 1))

    def with_detuning(self, d: float) -> "ChainSpec":
        return replace(self, d=d)


def oe_pair(c_oe: float, c_eo: float, b: float = 1.1, omega: float = 1.0) -> ChainSpec:
    """One oscillator driving one excitable cell (no z end)."""
    return ChainSpec(c_oe=c_oe, c_eo=c_eo, n_excitable=1, b=b, omega=omega,
                     has_z=False)


def oeo(c_oe: float, c_eo: float, b: float = 1.1, omega: float = 1.0,
        d: float = 0.0) -> ChainSpec:
    """Two oscillators relayed through a single excitable cell."""
    return ChainSpec(c_oe=c_oe, c_eo=c_eo, n_excitable=1, b=b, omega=omega, d=d)


def oeeo(c_oe: float, c_eo: float, c_ee: float, b: float = 1.1,
         omega: float = 1.0, d: float = 0.0) -> ChainSpec:
    """Two oscillators relayed through two excitable cells."""
    return ChainSpec(c_oe=c_oe, c_eo=c_eo, c_ee=c_ee, n_excitable=2, b=b,
                     omega=omega, d=d)


def chain(n_excitable: int, c_oe: float, c_eo: float, c_ee: float,
          b: float = 1.1, omega: float = 1.0, d: float = 0.0,
          omega_x: Optional[float] = None,
          omega_z: Optional[float] = None) -> ChainSpec:
    """General two-oscillator chain with n_excitable relay cells."""
    return ChainSpec(c_oe=c_oe, c_eo=c_eo, c_ee=c_ee, n_excitable=n_excitable,
                     b=b, omega=omega, d=d, omega_x=omega_x, omega_z=omega_z)


def f_excitable(y, b):
    """Intrinsic excitable rate 1 - b*cos(y). Accepts scalars or arrays."""
    return 1.0 - b * np.cos(y)


def chain_vector_field(spec: ChainSpec, state) -> np.ndarray:
    """Reference vector field evaluation (readable, not the hot path).

    The integration kernels implement the same arithmetic; this version is
    the ground truth they are tested against.
    """
    s = np.asarray(state, dtype=float)
    if s.shape != (spec.dim,):
        raise ValueError("state dimension %d does not match spec dimension %d"
                         % (s.size, spec.dim))
    n = spec.n_excitable
    wx, wz = spec.end_frequencies
    out = np.empty_like(s)
    x = s[0]
    out[0] = wx + spec.c_oe * math.sin(s[1] - x)
    for j in range(1, n + 1):
        yj = s[j]
        dy = 1.0 - spec.b * math.cos(yj)
        if j == 1:
            dy += spec.c_eo * math.sin(x - yj)
        if j == n and spec.has_z:
            dy += spec.c_eo * math.sin(s[-1] - yj)
        if n > 1:
            if j > 1:
                dy += spec.c_ee * math.sin(s[j - 1] - yj)
            if j < n:
                dy += spec.c_ee * math.sin(s[j + 1] - yj)
        out[j] = dy
    if spec.has_z:
        out[-1] = wz + spec.c_oe * math.sin(s[n] - s[-1])
    return out


@dataclass(frozen=True)
class OEFixedPoint:
    """Locked equilibrium of the oscillator-excitable pair."""

    x: float
    y: float
    eigenvalues: tuple
    at_saddle_node: bool

    @property
    def stable(self) -> bool:
        return all(ev.real < 0 for ev in self.eigenvalues)


def oe_fixed_point(c_oe: float, c_eo: float, omega: float = 1.0,
                   b: float = 1.1, sn_tol: float = 1e-12):
    """Stable equilibrium of the pair, or None when the cells keep moving.

    Existence needs c_oe >= omega (the oscillator can be held) and
    c_eo <= (b-1)*c_oe/omega (the balance cos(y) = (c_eo*omega + c_oe) /
    (c_oe*b) is solvable). The second condition at equality is the
    saddle-node line, flagged on the returned value.
    """
    if b <= 1.0:
        raise ValueError("fixed-point analysis requires b > 1")
    if c_oe <= 0:
        return None
    if c_oe < omega:
        return None
    cos_y = (c_eo * omega + c_oe) / (c_oe * b)
    if cos_y > 1.0 + sn_tol:
        return None
    cos_y = min(cos_y, 1.0)
    # stable branch: y on the rest side, oscillator held behind by arcsin
    y = -math.acos(cos_y)
    x = y + math.asin(min(1.0, omega / c_oe))
    jac = np.array([
        [-c_oe * math.cos(y - x), c_oe * math.cos(y - x)],
        [c_eo * math.cos(x - y), b * math.sin(y) - c_eo * math.cos(x - y)],
    ])
    eig = tuple(np.linalg.eigvals(jac))
    at_sn = abs(c_eo - (b - 1.0) * c_oe / omega) <= max(sn_tol, 1e-9 * c_oe)
    return OEFixedPoint(x=x, y=y, eigenvalues=eig, at_saddle_node=at_sn)


def saddle_node_c_eo(c_oe: float, omega: float = 1.0, b: float = 1.1) -> float:
    """c_eo value of the saddle-node line at the given c_oe."""
    return (b - 1.0) * c_oe / omega


def snic_to_b(p: float) -> tuple:
    """Map the saddle-node-on-circle normal-form parameter to (b, rescale).

    The normal form dx/dt = 1 - cos(x) + (1 + cos(x))*p equals
    (1+p) * (1 - b*cos(x)) with b = (1-p)/(1+p); the second return value is
    the time-rescale factor (1+p).
    """
    if p <= -1.0:
        raise ValueError("normal-form parameter must exceed -1")
    return (1.0 - p) / (1.0 + p), 1.0 + p
