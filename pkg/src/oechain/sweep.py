"""Parameter-plane cartography: region grids, boundary bisection,
heterogeneity homotopies, multistability scans, and the symmetry-breaking
branch diagram.

Probes are plain integrations classified after a transient. Boundary and
heterogeneity bisections warm-start each probe from the nearest already
converged state so that bisection tracks one branch instead of hopping
basins; cold starts from the fixed protocol remain available for
cross-checking. Independent probes (grid points, initial conditions) can
be spread over processes via the OECHAIN_WORKERS environment variable.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .analysis import (FIXED_POINT, UNLOCKED, LockPattern, classify_locking,
                       protocol_ic, random_ic)
from .integrate import IntegratorConfig, integrate
from .model import ChainSpec

TWO_PI = 2.0 * math.pi

# settling time validated on the mixed-state window of the symmetric
# two-relay chain; shorter transients misclassify near the pitchfork
PROBE_CONFIG = IntegratorConfig(dt=0.005, t_transient=3000.0,
                                t_record=1000.0, sample_every=4)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("OECHAIN_WORKERS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    """Map a picklable worker over items, possibly across processes."""
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# predicates used by boundary tracing

def probe(spec: ChainSpec, initial_state=None, config: IntegratorConfig = None):
    if config is None:
        config = PROBE_CONFIG
    if initial_state is None:
        initial_state = protocol_ic(spec)
    return integrate(spec, initial_state, config)


def predicate_fires(cell: int = 1):
    """True once the given cell produced at least two firing events."""

    def check(traj, spec):
        return traj.firings[cell].size >= 2

    return check


def predicate_one_to_one(cell: int = 1, slack: int = 2):
    """True when the cell fires once per oscillator cycle."""

    def check(traj, spec):
        return abs(traj.firings[cell].size - traj.firings[0].size) <= slack

    return check


def predicate_fixed_point():
    """True when the x oscillator stalls (pair past the saddle-node)."""

    def check(traj, spec):
        x = traj.states[:, 0]
        half = len(x) // 2
        return (x[-1] - x[half]) < TWO_PI

    return check


# ---------------------------------------------------------------------------
# boundary tracing

@dataclass
class BoundaryCurve:
    """Polyline of (c_oe, c_eo) points where a predicate flips."""

    label: str
    points: np.ndarray
    below: str = ""
    above: str = ""
    skipped: list = field(default_factory=list)


def _nearest_state(history, key):
    if not history:
        return None
    k = min(history, key=lambda h: abs(h[0] - key))
    return k[1]


def trace_boundary(make_spec, c_oe_values, predicate, c_eo_bracket,
                   tol: float = 1e-3, config: IntegratorConfig = None,
                   warm_start: bool = True, label: str = "",
                   below: str = "", above: str = "") -> BoundaryCurve:
    """Bisect in c_eo for a predicate flip at each c_oe.

    make_spec(c_oe, c_eo) builds the system; predicate(traj, spec) is the
    quantity whose flip defines the boundary. Columns without a flip in
    the bracket are skipped and reported, not forced.
    """
    lo0, hi0 = c_eo_bracket
    points = []
    skipped = []
    carry = []  # (c_eo, final_state) probes from the previous column
    for c_oe in c_oe_values:
        history = list(carry)
        carry = []

        def run(c_eo):
            spec = make_spec(c_oe, c_eo)
            ic = _nearest_state(history, c_eo) if warm_start else None
            traj = probe(spec, ic, config)
            state = np.array(traj.final_state)
            history.append((c_eo, state))
            carry.append((c_eo, state))
            return predicate(traj, spec)

        lo, hi = lo0, hi0
        p_lo, p_hi = run(lo), run(hi)
        if p_lo == p_hi:
            skipped.append(c_oe)
            continue
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if run(mid) == p_lo:
                lo = mid
            else:
                hi = mid
        points.append((c_oe, 0.5 * (lo + hi)))
    return BoundaryCurve(label=label, points=np.array(points),
                         below=below, above=above, skipped=skipped)


# ---------------------------------------------------------------------------
# heterogeneity homotopies

@dataclass(frozen=True)
class HomotopyLine:
    """Straight segment (c_oe, c_eo)(p) = start + p*(end - start)."""

    start: tuple
    end: tuple
    samples: int = 25

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("need at least two samples")

    def parameter_values(self):
        return np.linspace(0.0, 1.0, self.samples)

    def point(self, p: float):
        return (self.start[0] + p * (self.end[0] - self.start[0]),
                self.start[1] + p * (self.end[1] - self.start[1]))


def pattern_matcher(n: int, m: int, relations=None):
    """Predicate on LockPattern: same reduced ratio, still locked."""
    target = LockPattern(n, m, "any").reduced()

    def match(pattern: LockPattern) -> bool:
        if pattern.relation in (UNLOCKED, FIXED_POINT):
            return False
        if relations is not None and pattern.relation not in relations:
            return False
        r = pattern.reduced()
        return (r.n, r.m) == (target.n, target.m)

    return match


@dataclass
class HeterogeneityCurve:
    line: HomotopyLine
    p_values: np.ndarray
    d_max: np.ndarray
    notes: list = field(default_factory=list)


def max_heterogeneity(line: HomotopyLine, make_spec, match,
                      d_bracket=(0.0, 0.5), tol: float = 1e-3,
                      config: IntegratorConfig = None) -> HeterogeneityCurve:
    """Largest detuning d sustaining a locking pattern along a homotopy.

    make_spec(c_oe, c_eo, d) builds the system; match(LockPattern) decides
    whether the pattern survived. Points where the pattern is absent
    already at d=0 get d_max = nan and a note.
    """
    d_lo, d_hi = d_bracket
    p_values = line.parameter_values()
    d_max = np.full(p_values.size, math.nan)
    notes = []
    carry_state = None
    for ip, p in enumerate(p_values):
        c_oe, c_eo = line.point(p)
        history = []
        if carry_state is not None:
            history.append((d_lo, carry_state))

        def run(d):
            spec = make_spec(c_oe, c_eo, d)
            ic = _nearest_state(history, d)
            traj = probe(spec, ic, config)
            history.append((d, np.array(traj.final_state)))
            return classify_locking(traj, spec)

        if not match(run(d_lo)):
            notes.append((p, "pattern absent at d=%g" % d_lo))
            carry_state = None
            continue
        carry_state = history[-1][1]
        if match(run(d_hi)):
            d_max[ip] = d_hi
            notes.append((p, "pattern persists beyond d=%g" % d_hi))
            continue
        lo, hi = d_lo, d_hi
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if match(run(mid)):
                lo = mid
            else:
                hi = mid
        d_max[ip] = 0.5 * (lo + hi)
    return HeterogeneityCurve(line=line, p_values=p_values, d_max=d_max,
                              notes=notes)


# ---------------------------------------------------------------------------
# multistability

@dataclass
class AttractorSet:
    """Distinct locking patterns found at one parameter point."""

    point: dict
    patterns: list  # (LockPattern, basin fraction, witness final state)
    n_ic: int

    def labels(self):
        return [p.label() for p, _, _ in self.patterns]

    def fractions(self):
        return {p.key(): f for p, f, _ in self.patterns}


def bistability_scan(spec: ChainSpec, n_ic: int = 32, seed: int = 0,
                     config: IntegratorConfig = None, classifier=None,
                     ic_sampler=None) -> AttractorSet:
    """Classify runs from seeded random initial conditions.

    Basins smaller than 1/n_ic can be missed; n_ic defaults to 32.
    """
    if n_ic < 1:
        raise ValueError("n_ic must be positive")
    rng = np.random.default_rng(seed)
    if ic_sampler is None:
        def ic_sampler(r):
            return random_ic(spec.dim, r)
    if classifier is None:
        def classifier(traj):
            return classify_locking(traj, spec)
    found = {}
    counts = {}
    for _ in range(n_ic):
        ic = ic_sampler(rng)
        traj = probe(spec, ic, config)
        pattern = classifier(traj)
        key = pattern.key()
        counts[key] = counts.get(key, 0) + 1
        if key not in found:
            found[key] = (pattern, np.array(traj.final_state))
    patterns = [(found[k][0], counts[k] / n_ic, found[k][1])
                for k in sorted(counts, key=lambda k: -counts[k])]
    point = {"c_oe": spec.c_oe, "c_eo": spec.c_eo, "c_ee": spec.c_ee,
             "n_excitable": spec.n_excitable, "d": spec.d}
    return AttractorSet(point=point, patterns=patterns, n_ic=n_ic)


def _grid_cell(args):
    spec, ic, config, classify_kwargs = args
    traj = probe(spec, ic, config)
    return classify_locking(traj, spec, **classify_kwargs).label()


def classification_grid(make_spec, c_oe_values, c_eo_values,
                        config: IntegratorConfig = None, seed=None,
                        **classify_kwargs):
    """Label a (c_oe, c_eo) grid.

    Cells start from the fixed protocol state, or from per-cell random
    draws when seed is given (each cell seeds its own generator, so the
    labels do not depend on evaluation order). Returns a 2D array of
    labels indexed [i_c_eo, i_c_oe].
    """
    jobs = []
    index = 0
    for c_eo in c_eo_values:
        for c_oe in c_oe_values:
            spec = make_spec(c_oe, c_eo)
            ic = None
            if seed is not None:
                ic = random_ic(spec.dim, np.random.default_rng([seed, index]))
            jobs.append((spec, ic, config, classify_kwargs))
            index += 1
    labels = parallel_map(_grid_cell, jobs)
    out = np.array(labels, dtype=object)
    return out.reshape(len(c_eo_values), len(c_oe_values))


# ---------------------------------------------------------------------------
# symmetry-breaking branch diagram

@dataclass
class PitchforkPoint:
    c_eo: float
    sync_stable: bool
    anti_stable: bool
    mixed_offset: float  # nan when the mixed pair is absent


def _flow(state, duration, spec, dt=0.002):
    n = max(1, int(round(duration / dt)))
    s = np.array(state, dtype=float)
    wx, wz = spec.end_frequencies
    kernels.chain_rk4(s, duration / n, n, wx, wz, spec.b, spec.c_oe,
                      spec.c_eo, spec.c_ee, spec.has_z)
    return s


def _monodromy_stable(state, period, spec, eps=1e-6, rate_slack=2e-3):
    """Floquet stability of the orbit through state, by finite
    differences of the return map iterated over several periods so that
    weak instabilities near a branch point compound above noise. The
    trivial unit multiplier is discarded; the rest decide stability via
    their per-period growth rate."""
    n_rounds = max(1, int(round(60.0 / period)))
    dim = len(state)
    jac = np.empty((dim, dim))
    for i in range(dim):
        dv = np.zeros(dim)
        dv[i] = eps
        plus = _flow(state + dv, n_rounds * period, spec)
        minus = _flow(state - dv, n_rounds * period, spec)
        jac[:, i] = (plus - minus) / (2.0 * eps)
    mults = np.sort(np.abs(np.linalg.eigvals(jac)))[::-1]
    trivial = int(np.argmin(np.abs(mults - 1.0)))
    rest = np.delete(mults, trivial)
    rate = float(rest.max()) ** (1.0 / n_rounds)
    return bool(rate < 1.0 + rate_slack), mults


def _sync_orbit(spec: ChainSpec):
    """Point on, and period of, the end-synchronous orbit, found inside
    the synchrony manifold where it attracts."""
    from .analysis import reduced_pair
    pair = reduced_pair(spec)
    cfg = IntegratorConfig(dt=0.002, t_transient=2000.0, t_record=200.0,
                           sample_every=1)
    traj = integrate(pair, protocol_ic(pair), cfg)
    fx = traj.firings[0]
    if fx.size < 3:
        return None, math.nan
    base = float(np.mean(np.diff(fx)))
    st = traj.states[-1]
    if spec.n_excitable == 1:
        full = np.array([st[0], st[1], st[0]])
    else:
        full = np.array([st[0], st[1], st[1], st[0]])
    # the orbit may repeat only after several end-cell firings, so pick
    # the smallest multiple of the mean interval that closes the loop
    best, best_err = base, math.inf
    for k in range(1, 9):
        period = k * base
        gap = _flow(full, period, spec) - full
        err = float(np.abs(np.arctan2(np.sin(gap), np.cos(gap))).max())
        if err < 1e-6:
            return full, period
        if err < best_err:
            best, best_err = period, err
    return full, best


def _anti_orbit(spec: ChainSpec, guess=None):
    """Shooting for the orbit mapped to itself by the end-swap after half
    a period; returns (state on orbit, full period) or (None, nan)."""
    from scipy.optimize import root
    if spec.n_excitable != 2 or not spec.has_z:
        raise ValueError("anti-phase shooting implemented for two relay cells")
    if guess is None:
        y0 = -math.acos(1.0 / spec.b)
        guess = np.array([y0, y0, -math.pi, math.pi])  # y1, y2, z, half period

    def residual(v):
        y1, y2, z, h = v
        if h <= 0.1:
            return np.array([1e3, 1e3, 1e3, 1e3])
        out = _flow(np.array([0.0, y1, y2, z]), h, spec)
        return np.array([out[0] - (z + TWO_PI), out[1] - y2,
                         out[2] - y1, out[3]])

    sol = root(residual, guess, tol=1e-10)
    if not sol.success or np.abs(residual(sol.x)).max() > 1e-7:
        return None, math.nan
    y1, y2, z, h = sol.x
    return np.array([0.0, y1, y2, z]), 2.0 * h


def _mirror_state(state):
    return np.array(state)[::-1].copy()


def pitchfork_diagram(c_oe: float, c_eo_values, c_ee: float = 0.5,
                      b: float = 1.1, omega: float = 1.0,
                      config: IntegratorConfig = None):
    """Branch diagram of the end-to-end offset versus c_eo for the
    two-relay chain at d=0.

    Offsets 0 and pi exist at every c_eo by symmetry; their stability
    comes from Floquet multipliers of the orbits, located inside the
    synchrony manifold and by half-period shooting respectively. The
    mixed pair +-offset is followed as an attractor, warm-started along
    the scan, with the mirrored run giving the opposite sign.
    """
    from .model import oeeo

    points = []
    mixed_carry = None
    anti_guess = None
    for c_eo in c_eo_values:
        spec = oeeo(c_oe=c_oe, c_eo=c_eo, c_ee=c_ee, b=b, omega=omega)

        sync_state, sync_period = _sync_orbit(spec)
        sync_stable = False
        if sync_state is not None:
            sync_stable, _ = _monodromy_stable(sync_state, sync_period, spec)

        anti_stable = False
        anti_state, anti_period = _anti_orbit(spec, anti_guess)
        if anti_state is not None:
            anti_guess = np.array([anti_state[1], anti_state[2],
                                   anti_state[3], anti_period / 2.0])
            anti_stable, _ = _monodromy_stable(anti_state, anti_period, spec)

        ic = mixed_carry if mixed_carry is not None else protocol_ic(spec)
        traj = probe(spec, ic, config)
        pattern = classify_locking(traj, spec)
        if pattern.relation == "mixed":
            mixed_offset = pattern.phase_difference
            mixed_carry = np.array(traj.final_state)
        else:
            mixed_offset = math.nan
            mixed_carry = None
        points.append(PitchforkPoint(c_eo=float(c_eo),
                                     sync_stable=sync_stable,
                                     anti_stable=anti_stable,
                                     mixed_offset=mixed_offset))
    return points


def mirrored_offset(c_oe: float, c_eo: float, c_ee: float = 0.5,
                    b: float = 1.1, omega: float = 1.0,
                    config: IntegratorConfig = None):
    """Offsets from a mixed-state run and its end-swapped mirror."""
    from .model import oeeo
    spec = oeeo(c_oe=c_oe, c_eo=c_eo, c_ee=c_ee, b=b, omega=omega)
    ic = protocol_ic(spec)
    a = classify_locking(probe(spec, ic, config), spec)
    m = classify_locking(probe(spec, _mirror_state(ic), config), spec)
    return a.phase_difference, m.phase_difference
