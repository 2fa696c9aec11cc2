"""Backend selection for the hot loops.

The compiled extension (``rgreedy._kernels._native``) is used when it was
built; otherwise the numpy fallback takes over. Set ``RGREEDY_FORCE_FALLBACK=1``
before import to force the fallback, e.g. for benchmarking or debugging.
"""

import os

import numpy as np

from . import _fallback

try:
    from . import _native
except ImportError:
    _native = None

_impl = _fallback
if _native is not None and os.environ.get("RGREEDY_FORCE_FALLBACK", "0") in ("", "0"):
    _impl = _native

HAVE_NATIVE = _native is not None


def backend_name():
    """Name of the active backend, ``native`` or ``fallback``."""
    return "native" if _impl is _native else "fallback"


def mackey_glass_grid(a, b, exponent, dt, tau_steps, n_steps, history, impl=None):
    """Run the delay-flow integrator; returns the full step grid.

    ``history`` must hold tau_steps+1 values covering x(-tau)..x(0). The
    returned array has tau_steps+1+n_steps entries, one per integrator step.
    """
    grid = np.empty(tau_steps + 1 + n_steps, dtype=np.float64)
    grid[: tau_steps + 1] = history
    (impl or _impl).mackey_glass_grid(
        float(a), float(b), float(exponent), float(dt), tau_steps, n_steps, grid
    )
    return grid


def reservoir_run(x0, u, w_data, w_indices, w_indptr, gw, theta, ba, ae0,
                  noise=None, impl=None):
    """Run the recurrent update over ``u``; returns the (T, n) state matrix."""
    T = u.shape[0]
    n = x0.shape[0]
    out = np.empty((T, n), dtype=np.float64)
    (impl or _impl).reservoir_run(
        x0, u, w_data, w_indices, w_indptr, gw, theta, float(ba), ae0, noise, out
    )
    return out
