# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: delay-flow RK4 integration and the reservoir update.

Mirrors ``_fallback`` expression for expression; see that module for the
reference semantics.
"""

from libc.math cimport cos, pow, sqrt

import numpy as np


def mackey_glass_grid(double a, double b, double exponent, double dt,
                      Py_ssize_t tau_steps, Py_ssize_t n_steps,
                      double[::1] grid):
    cdef Py_ssize_t m
    cdef double x, xd0, xd1, xdh, k1, k2, k3, k4, x2, x3, x4
    cdef double half_dt = 0.5 * dt
    cdef double sixth_dt = dt / 6.0
    for m in range(tau_steps, tau_steps + n_steps):
        x = grid[m]
        xd0 = grid[m - tau_steps]
        xd1 = grid[m - tau_steps + 1]
        xdh = 0.5 * (xd0 + xd1)
        k1 = a * xd0 / (1.0 + pow(xd0, exponent)) - b * x
        x2 = x + half_dt * k1
        k2 = a * xdh / (1.0 + pow(xdh, exponent)) - b * x2
        x3 = x + half_dt * k2
        k3 = a * xdh / (1.0 + pow(xdh, exponent)) - b * x3
        x4 = x + dt * k3
        k4 = a * xd1 / (1.0 + pow(xd1, exponent)) - b * x4
        grid[m + 1] = x + sixth_dt * (k1 + 2.0 * (k2 + k3) + k4)


def reservoir_run(double[::1] x0, double[::1] u,
                  double[::1] w_data, long long[::1] w_indices,
                  long long[::1] w_indptr,
                  double[::1] gw, double[::1] theta, double ba,
                  double[::1] ae0, noise, double[:, ::1] out):
    cdef Py_ssize_t T = u.shape[0]
    cdef Py_ssize_t n = x0.shape[0]
    cdef bint has_noise = noise is not None
    cdef double[:, ::1] noise_mv = noise if has_noise else None
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    e_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] e = e_arr
    cdef Py_ssize_t t, i, k
    cdef double s, arg, c, v, ut
    for t in range(T):
        ut = u[t]
        for i in range(n):
            e[i] = sqrt(x[i])
        for i in range(n):
            s = 0.0
            for k in range(w_indptr[i], w_indptr[i + 1]):
                s = s + w_data[k] * e[w_indices[k]]
            arg = ba * s * s + gw[i] * ut + theta[i]
            c = cos(arg)
            v = ae0[i] * (c * c)
            if has_noise:
                v = v + noise_mv[t, i]
                if v < 0.0:
                    v = 0.0
            out[t, i] = v
        for i in range(n):
            x[i] = out[t, i]
