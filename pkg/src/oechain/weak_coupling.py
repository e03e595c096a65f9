"""Averaged two-oscillator reduction for the symmetric relay chain.

For weak oscillator-to-relay feedback the end-to-end phase offset evolves
on a slow time scale. The ingredients are computed here on periodic
grids: the oscillator limit cycle U(s) and its period T, the periodic
forced response (w1, w2) of the linearized relay pair, the averaged
interaction function H, and the offset dynamics G(phi) = H(-phi) - H(phi)
whose zeros and slopes decide whether synchrony or anti-phase is stable.

All periodic solves are spectral: Fourier division gives the unique
periodic forced response directly, and the limit cycle comes from a
spectral antiderivative of ds/du followed by a spline inversion. Residual
and endpoint checks below enforce the same tolerances an initial-value
shooting approach would be held to.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

TWO_PI = 2.0 * math.pi

DEFAULT_BRACKET = (0.3, 0.9)


@dataclass(frozen=True)
class ReductionInputs:
    """Parameters of the reduction.

    skew is the relative weight of a second harmonic in the coupling
    waveform sin(u) + skew*sin(2u); the default pure-sine waveform makes
    the averaged dynamics symmetric under phi -> phi + T/2.
    """

    c_oe: float
    c_ee: float = 0.5
    b: float = 1.1
    skew: float = 0.0
    n_grid: int = 2048
    scale_grid: bool = True

    def __post_init__(self):
        if not 0.0 < self.c_oe < 1.0:
            raise ValueError("c_oe must lie in (0, 1) for a periodic orbit")
        if self.b <= 1.0:
            raise ValueError("b must exceed 1")
        if self.c_ee < 0.0:
            raise ValueError("c_ee must be nonnegative")
        if self.n_grid < 64:
            raise ValueError("n_grid too small")

    def waveform(self):
        a = self.skew

        def p(u):
            return np.sin(u) + a * np.sin(2.0 * u)

        def dp(u):
            return np.cos(u) + 2.0 * a * np.cos(2.0 * u)

        return p, dp

    def grid_size(self) -> int:
        n = self.n_grid
        if self.scale_grid:
            n = int(math.ceil(n / math.sqrt(1.0 - min(self.c_oe, 0.99))))
        return n + (n % 2)


@dataclass(frozen=True)
class OrbitTable:
    """Uniformly sampled oscillator limit cycle: U(s) on s in [0, T)."""

    T: float
    s: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    endpoint_error: float


def periodic_orbit_U(c_oe: float, n_grid: int = 2048, skew: float = 0.0,
                     scale_grid: bool = True) -> OrbitTable:
    """Limit cycle of u' = 1 - c_oe*P(u) and its period.

    The period is the spectrally exact mean of du/(1 - c_oe*P(u)) over
    one cycle; inverting the antiderivative s(u) gives U on a uniform
    s grid. Raises if the recovered cycle fails |U(T) - 2*pi| < 1e-8.
    """
    inputs = ReductionInputs(c_oe=c_oe, skew=skew, n_grid=n_grid,
                             scale_grid=scale_grid)
    p, _ = inputs.waveform()
    n_s = inputs.grid_size()
    n_fine = 8 * n_s

    u = TWO_PI * np.arange(n_fine) / n_fine
    drive = 1.0 - c_oe * p(u)
    if drive.min() <= 0.0:
        raise ValueError("c_oe=%g stalls the oscillator for this waveform"
                         % c_oe)
    g = 1.0 / drive
    gbar = g.mean()
    T = TWO_PI * gbar
    ghat = np.fft.rfft(g - gbar)
    ik = 1j * np.arange(ghat.size, dtype=float)
    ik[0] = 1.0  # DC is carried by the linear term below
    fluct = np.fft.irfft(ghat / ik, n=n_fine)
    s_of_u = gbar * u + (fluct - fluct[0])

    inv = CubicSpline(np.concatenate([s_of_u, [T]]),
                      np.concatenate([u, [TWO_PI]]))
    s = T * np.arange(n_s) / n_s
    U = inv(s)
    dU = 1.0 - c_oe * p(U)
    err = abs(float(inv(T)) - TWO_PI)
    if err >= 1e-8:
        raise RuntimeError("limit-cycle endpoint check failed: %.3e" % err)
    return OrbitTable(T=T, s=s, U=U, dU=dU, endpoint_error=err)


@dataclass(frozen=True)
class ResponseTable:
    """Periodic forced response of the two relay cells on the orbit grid."""

    w1: np.ndarray
    w2: np.ndarray
    lam_sum: float
    lam_diff: float
    residual: float
    w1_hat: np.ndarray = field(repr=False, default=None)
    w2_hat: np.ndarray = field(repr=False, default=None)


def forced_response_W(inputs: ReductionInputs, orbit: OrbitTable) -> ResponseTable:
    """Unique periodic solution of W' = A W + (sin U, 0).

    The symmetric coupling matrix diagonalizes in sum/difference
    coordinates with eigenvalues -sqrt(b^2-1) and -sqrt(b^2-1) - 2*c_ee,
    both negative, so Fourier division is well posed bin by bin. The
    result is checked against the differential equation on the grid.
    """
    lam_sum = -math.sqrt(inputs.b * inputs.b - 1.0)
    lam_diff = lam_sum - 2.0 * inputs.c_ee
    n_s = orbit.s.size
    q = np.sin(orbit.U)
    qh = np.fft.rfft(q) / n_s
    om = TWO_PI / orbit.T
    kk = np.arange(qh.size) * om
    uh = qh / (1j * kk - lam_sum)
    vh = qh / (1j * kk - lam_diff)
    w1h = 0.5 * (uh + vh)
    w2h = 0.5 * (uh - vh)
    w1 = np.fft.irfft(w1h * n_s, n=n_s)
    w2 = np.fft.irfft(w2h * n_s, n=n_s)

    # check W' = A W + (q, 0) pointwise via spectral differentiation
    diag = lam_sum - inputs.c_ee
    dw1 = np.fft.irfft(1j * kk * w1h * n_s, n=n_s)
    dw2 = np.fft.irfft(1j * kk * w2h * n_s, n=n_s)
    r1 = dw1 - (diag * w1 + inputs.c_ee * w2 + q)
    r2 = dw2 - (inputs.c_ee * w1 + diag * w2)
    residual = float(max(np.abs(r1).max(), np.abs(r2).max()))
    if residual >= 1e-8:
        raise RuntimeError("forced response residual %.3e exceeds 1e-8" % residual)
    return ResponseTable(w1=w1, w2=w2, lam_sum=lam_sum, lam_diff=lam_diff,
                         residual=residual, w1_hat=w1h, w2_hat=w2h)


@dataclass
class GFunctionTable:
    """Everything downstream code needs from one reduction run."""

    inputs: ReductionInputs
    T: float
    grid: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    m: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    H: np.ndarray
    G: np.ndarray
    zeros: list
    gprime0: float
    gprimeT2: float
    _m_hat: np.ndarray = field(repr=False, default=None)
    _w1_hat: np.ndarray = field(repr=False, default=None)
    _w2_hat: np.ndarray = field(repr=False, default=None)
    _kk: np.ndarray = field(repr=False, default=None)


def _h_value(table: GFunctionTable, phi: float) -> float:
    mh, w1h, w2h, kk = (table._m_hat, table._w1_hat, table._w2_hat, table._kk)
    phase = np.exp(1j * kk * phi)
    terms = np.conj(mh) * (w1h + w2h * phase)
    # real-FFT bins: DC once, interior twice, Nyquist once
    tot = terms[0].real + 2.0 * terms[1:-1].real.sum() + terms[-1].real
    return table.inputs.c_oe * tot


def interaction_H(table: GFunctionTable, phi: float) -> float:
    """Averaged interaction at offset phi (spectrally exact quadrature)."""
    return _h_value(table, phi)


def offset_velocity(table: GFunctionTable, phi: float) -> float:
    """G(phi) = H(-phi) - H(phi), the slow drift of the end-to-end offset."""
    return _h_value(table, -phi) - _h_value(table, phi)


def offset_velocity_slope(table: GFunctionTable, phi: float,
                          h: float = None) -> float:
    if h is None:
        h = table.T / 8192.0
    return (offset_velocity(table, phi + h)
            - offset_velocity(table, phi - h)) / (2.0 * h)


def build_table(inputs: ReductionInputs) -> GFunctionTable:
    """Run the full reduction pipeline for one parameter set."""
    orbit = periodic_orbit_U(inputs.c_oe, n_grid=inputs.n_grid,
                             skew=inputs.skew, scale_grid=inputs.scale_grid)
    resp = forced_response_W(inputs, orbit)
    _, dp = inputs.waveform()
    m = dp(orbit.U) / orbit.dU
    n_s = orbit.s.size
    mh = np.fft.rfft(m) / n_s
    kk = np.arange(mh.size) * TWO_PI / orbit.T

    table = GFunctionTable(inputs=inputs, T=orbit.T, grid=orbit.s,
                           U=orbit.U, dU=orbit.dU, m=m,
                           w1=resp.w1, w2=resp.w2,
                           H=None, G=None, zeros=[],
                           gprime0=math.nan, gprimeT2=math.nan,
                           _m_hat=mh, _w1_hat=resp.w1_hat,
                           _w2_hat=resp.w2_hat, _kk=kk)
    table.H = np.array([_h_value(table, phi) for phi in orbit.s])
    coupling_G(table)
    return table


def coupling_G(table: GFunctionTable):
    """Fill in G samples, its zeros with stability signs, and end slopes.

    A zero with negative slope attracts the offset. phi = 0 and phi = T/2
    are always zeros by construction; additional sign changes on the grid
    are refined by bisection.
    """
    G = np.array([offset_velocity(table, phi) for phi in table.grid])
    table.G = G
    table.gprime0 = offset_velocity_slope(table, 0.0)
    table.gprimeT2 = offset_velocity_slope(table, table.T / 2.0)

    zeros = [(0.0, -1 if table.gprime0 < 0 else 1),
             (table.T / 2.0, -1 if table.gprimeT2 < 0 else 1)]
    n = len(G)
    for i in range(n):
        right = table.T if i == n - 1 else table.grid[i + 1]
        ga, gb = G[i], G[(i + 1) % n]
        if ga == 0.0 or ga * gb >= 0.0:
            continue
        lo, hi, glo = table.grid[i], right, ga
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            gm = offset_velocity(table, mid)
            if glo * gm <= 0.0:
                hi = mid
            else:
                lo, glo = mid, gm
        root = 0.5 * (lo + hi)
        if all(abs(root - z) > 1e-6 * table.T for z, _ in zeros):
            slope = offset_velocity_slope(table, root)
            zeros.append((root, -1 if slope < 0 else 1))
    zeros.sort()
    table.zeros = zeros
    return G, zeros, table.gprime0, table.gprimeT2


def _slope_at(kind, c_oe, b, c_ee, skew):
    inputs = ReductionInputs(c_oe=c_oe, c_ee=c_ee, b=b, skew=skew)
    table = build_table(inputs)
    return table.gprime0 if kind == "synchrony" else table.gprimeT2


def _bisect_sign_change(fn, lo, hi, tol, n_scan=12):
    """First sign change of fn on [lo, hi], refined to tol."""
    xs = np.linspace(lo, hi, n_scan + 1)
    vals = [fn(x) for x in xs]
    for i in range(n_scan):
        if vals[i] == 0.0:
            return xs[i]
        if vals[i] * vals[i + 1] < 0.0:
            left, f_left, right = xs[i], vals[i], xs[i + 1]
            while right - left > tol:
                mid = 0.5 * (left + right)
                fm = fn(mid)
                if f_left * fm <= 0.0:
                    right = mid
                else:
                    left, f_left = mid, fm
            return 0.5 * (left + right)
    raise ValueError("no sign change on bracket (%g, %g)" % (lo, hi))


def critical_coe(b: float = 1.1, c_ee: float = 0.5,
                 bracket: tuple = DEFAULT_BRACKET, tol: float = 1e-4,
                 skew: float = 0.0, kind: str = "synchrony") -> float:
    """c_oe at which the slope of G through the chosen zero changes sign.

    kind 'synchrony' tracks the zero at phi=0, 'anti-phase' the one at
    T/2; with the pure sine waveform the two coincide.
    """
    if kind not in ("synchrony", "anti-phase"):
        raise ValueError("kind must be 'synchrony' or 'anti-phase'")
    return _bisect_sign_change(
        lambda c: _slope_at(kind, c, b, c_ee, skew),
        bracket[0], bracket[1], tol)


@dataclass(frozen=True)
class SymmetryBreaking:
    critical_synchrony: float
    critical_anti_phase: float

    @property
    def gap(self) -> float:
        return self.critical_anti_phase - self.critical_synchrony


def symmetry_breaking_check(a: float, b: float = 1.1, c_ee: float = 0.5,
                            bracket: tuple = (0.4, 0.92),
                            tol: float = 1e-4) -> SymmetryBreaking:
    """Critical c_oe for each zero when the waveform carries a second
    harmonic of weight a; a nonzero a splits the two values apart."""
    if a == 0.0:
        raise ValueError("a must be nonzero; the pure sine case is degenerate")
    c_sync = critical_coe(b=b, c_ee=c_ee, bracket=bracket, tol=tol,
                          skew=a, kind="synchrony")
    c_anti = critical_coe(b=b, c_ee=c_ee, bracket=bracket, tol=tol,
                          skew=a, kind="anti-phase")
    return SymmetryBreaking(critical_synchrony=c_sync,
                            critical_anti_phase=c_anti)
