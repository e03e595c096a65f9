"""Integration kernels for phase chains and Morris-Lecar networks.

Each kernel exists in two variants with identical signatures and semantics:
scalar loops jitted by numba, and vectorized numpy. backend.ACTIVE picks the
set at import time. State layout: phase chains are (x, y_1..y_N[, z]) of
unwrapped phases; ML networks are (V_0, w_0, V_1, w_1, ...) with per-cell
applied current i_app and neighbor conductances g_prev/g_next (zero at the
chain ends).

Recording convention for *_rk4_trace: out must have n // stride + 1 rows;
row 0 is the initial state and row k the state after k*stride steps. n must
be a multiple of stride. The state vector s is advanced in place.
"""

import numpy as np

from . import backend

if backend.ACTIVE == "numba":
    from numba import njit

    @njit(cache=True)
    def chain_deriv(s, out, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z):
        m = s.shape[0]
        n = m - 2 if has_z else m - 1
        x = s[0]
        out[0] = omega_x + c_oe * np.sin(s[1] - x)
        for j in range(1, n + 1):
            yj = s[j]
            dy = 1.0 - b * np.cos(yj)
            if j == 1:
                dy += c_eo * np.sin(x - yj)
            if j == n and has_z:
                dy += c_eo * np.sin(s[m - 1] - yj)
            if n > 1:
                if j > 1:
                    dy += c_ee * np.sin(s[j - 1] - yj)
                if j < n:
                    dy += c_ee * np.sin(s[j + 1] - yj)
            out[j] = dy
        if has_z:
            z = s[m - 1]
            out[m - 1] = omega_z + c_oe * np.sin(s[n] - z)

    @njit(cache=True)
    def chain_rk4(s, dt, n_steps, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z):
        m = s.shape[0]
        k1 = np.empty(m)
        k2 = np.empty(m)
        k3 = np.empty(m)
        k4 = np.empty(m)
        tmp = np.empty(m)
        for _ in range(n_steps):
            chain_deriv(s, k1, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z)
            for i in range(m):
                tmp[i] = s[i] + 0.5 * dt * k1[i]
            chain_deriv(tmp, k2, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z)
            for i in range(m):
                tmp[i] = s[i] + 0.5 * dt * k2[i]
            chain_deriv(tmp, k3, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z)
            for i in range(m):
                tmp[i] = s[i] + dt * k3[i]
            chain_deriv(tmp, k4, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z)
            for i in range(m):
                s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

    @njit(cache=True)
    def chain_rk4_trace(s, dt, n_steps, stride, out,
                        omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z):
        m = s.shape[0]
        for i in range(m):
            out[0, i] = s[i]
        row = 1
        done = 0
        while done < n_steps:
            chain_rk4(s, dt, stride, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z)
            done += stride
            for i in range(m):
                out[row, i] = s[i]
            row += 1

    @njit(cache=True)
    def ml_deriv(s, out, i_app, g_prev, g_next):
        nc = i_app.shape[0]
        for i in range(nc):
            v = s[2 * i]
            w = s[2 * i + 1]
            minf = 0.5 * (1.0 + np.tanh((v + 1.2) / 18.0))
            winf = 0.5 * (1.0 + np.tanh((v - 12.0) / 17.4))
            ic = 0.0
            if i > 0:
                ic += g_prev[i] * (s[2 * (i - 1)] - v)
            if i < nc - 1:
                ic += g_next[i] * (s[2 * (i + 1)] - v)
            out[2 * i] = (i_app[i] - 4.0 * minf * (v - 120.0)
                          - 8.0 * w * (v + 84.0) - 2.0 * (v + 60.0) + ic)
            out[2 * i + 1] = 0.3 * (winf - w) * np.cosh((v - 12.0) / 34.8)

    @njit(cache=True)
    def ml_rk4(s, dt, n_steps, i_app, g_prev, g_next):
        m = s.shape[0]
        k1 = np.empty(m)
        k2 = np.empty(m)
        k3 = np.empty(m)
        k4 = np.empty(m)
        tmp = np.empty(m)
        for _ in range(n_steps):
            ml_deriv(s, k1, i_app, g_prev, g_next)
            for i in range(m):
                tmp[i] = s[i] + 0.5 * dt * k1[i]
            ml_deriv(tmp, k2, i_app, g_prev, g_next)
            for i in range(m):
                tmp[i] = s[i] + 0.5 * dt * k2[i]
            ml_deriv(tmp, k3, i_app, g_prev, g_next)
            for i in range(m):
                tmp[i] = s[i] + dt * k3[i]
            ml_deriv(tmp, k4, i_app, g_prev, g_next)
            for i in range(m):
                s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

    @njit(cache=True)
    def ml_rk4_trace(s, dt, n_steps, stride, out, i_app, g_prev, g_next):
        m = s.shape[0]
        for i in range(m):
            out[0, i] = s[i]
        row = 1
        done = 0
        while done < n_steps:
            ml_rk4(s, dt, stride, i_app, g_prev, g_next)
            done += stride
            for i in range(m):
                out[row, i] = s[i]
            row += 1

else:

    def chain_deriv(s, out, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z):
        m = s.shape[0]
        n = m - 2 if has_z else m - 1
        y = s[1:n + 1]
        out[1:n + 1] = 1.0 - b * np.cos(y)
        out[0] = omega_x + c_oe * np.sin(s[1] - s[0])
        out[1] += c_eo * np.sin(s[0] - s[1])
        if has_z:
            out[m - 1] = omega_z + c_oe * np.sin(s[n] - s[m - 1])
            out[n] += c_eo * np.sin(s[m - 1] - s[n])
        if n > 1:
            fwd = np.sin(y[1:] - y[:-1])
            out[1:n] += c_ee * fwd
            out[2:n + 1] -= c_ee * fwd

    def _rk4_loop(deriv, s, dt, n_steps, args):
        k1 = np.empty_like(s)
        k2 = np.empty_like(s)
        k3 = np.empty_like(s)
        k4 = np.empty_like(s)
        tmp = np.empty_like(s)
        for _ in range(n_steps):
            deriv(s, k1, *args)
            np.multiply(k1, 0.5 * dt, out=tmp)
            tmp += s
            deriv(tmp, k2, *args)
            np.multiply(k2, 0.5 * dt, out=tmp)
            tmp += s
            deriv(tmp, k3, *args)
            np.multiply(k3, dt, out=tmp)
            tmp += s
            deriv(tmp, k4, *args)
            k2 += k3
            k1 += k4
            k1 += 2.0 * k2
            s += dt / 6.0 * k1

    def chain_rk4(s, dt, n_steps, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z):
        _rk4_loop(chain_deriv, s, dt, n_steps,
                  (omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z))

    def chain_rk4_trace(s, dt, n_steps, stride, out,
                        omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z):
        out[0] = s
        row = 1
        done = 0
        while done < n_steps:
            chain_rk4(s, dt, stride, omega_x, omega_z, b, c_oe, c_eo, c_ee, has_z)
            done += stride
            out[row] = s
            row += 1

    def ml_deriv(s, out, i_app, g_prev, g_next):
        v = s[0::2]
        w = s[1::2]
        minf = 0.5 * (1.0 + np.tanh((v + 1.2) / 18.0))
        winf = 0.5 * (1.0 + np.tanh((v - 12.0) / 17.4))
        ic = np.zeros_like(v)
        ic[1:] += g_prev[1:] * (v[:-1] - v[1:])
        ic[:-1] += g_next[:-1] * (v[1:] - v[:-1])
        out[0::2] = (i_app - 4.0 * minf * (v - 120.0)
                     - 8.0 * w * (v + 84.0) - 2.0 * (v + 60.0) + ic)
        out[1::2] = 0.3 * (winf - w) * np.cosh((v - 12.0) / 34.8)

    def ml_rk4(s, dt, n_steps, i_app, g_prev, g_next):
        _rk4_loop(ml_deriv, s, dt, n_steps, (i_app, g_prev, g_next))

    def ml_rk4_trace(s, dt, n_steps, stride, out, i_app, g_prev, g_next):
        out[0] = s
        row = 1
        done = 0
        while done < n_steps:
            ml_rk4(s, dt, stride, i_app, g_prev, g_next)
            done += stride
            out[row] = s
            row += 1
