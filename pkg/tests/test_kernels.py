"""Kernels against the readable reference field, and backend equivalence."""

import os
import subprocess
import sys

import numpy as np
import pytest

from oechain import backend, kernels
from oechain.model import chain, chain_vector_field, oeo
from oechain.ml import oeeo_network


def _reference_rk4(deriv, s, dt, n_steps):
    s = np.array(s, dtype=float)
    for _ in range(n_steps):
        k1 = deriv(s)
        k2 = deriv(s + 0.5 * dt * k1)
        k3 = deriv(s + 0.5 * dt * k2)
        k4 = deriv(s + dt * k3)
        s = s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return s


def test_chain_rk4_matches_reference_field():
    spec = chain(3, c_oe=0.4, c_eo=0.7, c_ee=0.9, b=1.2, d=0.05)
    rng = np.random.default_rng(0)
    s0 = rng.uniform(-2.0, 2.0, spec.dim)
    expect = _reference_rk4(lambda s: chain_vector_field(spec, s),
                            s0, 0.01, 25)
    got = s0.copy()
    wx, wz = spec.end_frequencies
    kernels.chain_rk4(got, 0.01, 25, wx, wz, spec.b, spec.c_oe, spec.c_eo,
                      spec.c_ee, spec.has_z)
    assert np.abs(got - expect).max() < 1e-12


def test_chain_rk4_single_relay_and_no_z():
    for spec in (oeo(0.6, 0.25), chain(1, 0.6, 0.25, 0.0)):
        s0 = np.array([0.3, -0.4, 1.1][:spec.dim])
        expect = _reference_rk4(lambda s: chain_vector_field(spec, s),
                                s0, 0.005, 40)
        got = s0.copy()
        wx, wz = spec.end_frequencies
        kernels.chain_rk4(got, 0.005, 40, wx, wz, spec.b, spec.c_oe,
                          spec.c_eo, spec.c_ee, spec.has_z)
        assert np.abs(got - expect).max() < 1e-12


def test_chain_trace_rows_equal_repeated_advance():
    spec = oeo(0.5, 0.3)
    wx, wz = spec.end_frequencies
    args = (wx, wz, spec.b, spec.c_oe, spec.c_eo, spec.c_ee, spec.has_z)
    s = np.array([0.3, -0.7, 1.1])
    out = np.empty((5, 3))
    kernels.chain_rk4_trace(s.copy(), 0.01, 8, 2, out, *args)
    step = s.copy()
    assert np.array_equal(out[0], s)
    for row in range(1, 5):
        kernels.chain_rk4(step, 0.01, 2, *args)
        assert np.array_equal(out[row], step)


def test_ml_rk4_matches_reference_field():
    net = oeeo_network(0.4, 0.05, 0.1)
    rng = np.random.default_rng(1)
    s0 = np.empty(8)
    s0[0::2] = rng.uniform(-60.0, 20.0, 4)
    s0[1::2] = rng.uniform(0.0, 0.4, 4)
    expect = _reference_rk4(net.vector_field, s0, 0.01, 20)
    got = s0.copy()
    kernels.ml_rk4(got, 0.01, 20, *net.coupling_arrays())
    assert np.abs(got - expect).max() < 1e-9


def test_active_backend_is_reported():
    assert backend.active() in ("numba", "numpy")
    assert backend.active() == backend.ACTIVE


_PROBE_SNIPPET = """
import numpy as np
from oechain import backend, kernels
from oechain.model import oeeo
spec = oeeo(0.78, 0.13, 0.5)
wx, wz = spec.end_frequencies
s = np.array([0.3, -0.43, -0.43, 1.1])
kernels.chain_rk4(s, 0.005, 4000, wx, wz, spec.b, spec.c_oe, spec.c_eo,
                  spec.c_ee, spec.has_z)
print(backend.ACTIVE)
print(s.tobytes().hex())
"""


def _run_with_backend(name):
    env = dict(os.environ, OECHAIN_BACKEND=name)
    res = subprocess.run([sys.executable, "-c", _PROBE_SNIPPET],
                         capture_output=True, text=True, env=env, check=True)
    lines = res.stdout.strip().splitlines()
    return lines[0], lines[1]


def test_backend_equivalence_under_env_flag():
    used_np, state_np = _run_with_backend("numpy")
    assert used_np == "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        pytest.skip("numba not installed")
    used_nb, state_nb = _run_with_backend("numba")
    assert used_nb == "numba"
    a = np.frombuffer(bytes.fromhex(state_np))
    b = np.frombuffer(bytes.fromhex(state_nb))
    # same arithmetic order in both kernels, so agreement is tight
    assert np.abs(a - b).max() < 1e-9


def test_bad_backend_request_fails_loudly():
    env = dict(os.environ, OECHAIN_BACKEND="cuda")
    res = subprocess.run([sys.executable, "-c", "import oechain.backend"],
                         capture_output=True, text=True, env=env)
    assert res.returncode != 0
    assert "OECHAIN_BACKEND" in res.stderr
