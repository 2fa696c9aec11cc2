"""Pure numpy implementations of the hot loops.

These are the reference semantics for the compiled extension in ``_native``;
both keep the same floating-point expression structure so results agree to
roundoff. Selection between the two happens in ``rgreedy._kernels``.
"""

import numpy as np


def mackey_glass_grid(a, b, exponent, dt, tau_steps, n_steps, grid):
    """Integrate dx/dt = a*x(t-tau)/(1+x(t-tau)**exponent) - b*x(t) in place.

    ``grid`` holds one value per integrator step; entries ``0..tau_steps``
    must already contain the history x(-tau)..x(0). Fixed-step RK4 with the
    delayed value linearly interpolated between buffer slots at half steps.
    """
    half_dt = 0.5 * dt
    sixth_dt = dt / 6.0
    for m in range(tau_steps, tau_steps + n_steps):
        x = grid[m]
        xd0 = grid[m - tau_steps]
        xd1 = grid[m - tau_steps + 1]
        xdh = 0.5 * (xd0 + xd1)
        k1 = a * xd0 / (1.0 + xd0**exponent) - b * x
        x2 = x + half_dt * k1
        k2 = a * xdh / (1.0 + xdh**exponent) - b * x2
        x3 = x + half_dt * k2
        k3 = a * xdh / (1.0 + xdh**exponent) - b * x3
        x4 = x + dt * k3
        k4 = a * xd1 / (1.0 + xd1**exponent) - b * x4
        grid[m + 1] = x + sixth_dt * (k1 + 2.0 * (k2 + k3) + k4)


def reservoir_run(x0, u, w_data, w_indices, w_indptr, gw, theta, ba, ae0, noise, out):
    """Drive the recurrent update over the input sequence ``u``.

    Per step: x_i <- ae0_i * cos(ba * s_i^2 + gw_i * u_t + theta_i)^2 with
    s_i the CSR row sum of coupling weights times sqrt(x). Optional additive
    noise (one row per step) is applied afterwards and clamped at zero.
    """
    rows = w_indptr[:-1].astype(np.intp)
    x = x0.copy()
    for t in range(u.shape[0]):
        e = np.sqrt(x)
        s = np.add.reduceat(w_data * e[w_indices], rows)
        arg = ba * s * s + gw * u[t] + theta
        c = np.cos(arg)
        x = ae0 * (c * c)
        if noise is not None:
            x = x + noise[t]
            np.maximum(x, 0.0, out=x)
        out[t] = x
