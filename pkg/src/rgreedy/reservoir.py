"""Recurrent cos^2 network: coupling construction and the state update.

State update per neuron i:

    x_i(n+1) = alpha * e0_sq_i * cos(beta * alpha * s_i^2
               + gamma * winj_i * u(n+1) + theta_i)^2 + eta_i

with s_i the coupling-weighted sum of field amplitudes sqrt(x_j(n)) and
eta_i optional additive Gaussian noise (clamped so intensities stay >= 0).
Field amplitudes are taken real and non-negative, sqrt of the intensities.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError

DEFAULT_THETA0 = 0.44 * math.pi
DEFAULT_DELTA_THETA = 0.51 * math.pi  # second offset 0.95*pi when split


def grid_side(n):
    """Side length g of the g x g grid embedding; n must be a perfect square."""
    g = math.isqrt(int(n))
    if g * g != n or g < 1:
        raise ConfigurationError(f"neuron count must be a perfect square >= 1, got {n}")
    return g


def make_theta(n, theta0=DEFAULT_THETA0, delta=DEFAULT_DELTA_THETA, mode="uniform"):
    """Per-neuron phase offsets: all theta0, or a checkerboard split on the grid."""
    g = grid_side(n)
    if mode == "uniform":
        return np.full(n, theta0, dtype=np.float64)
    if mode == "checkerboard":
        rows, cols = np.divmod(np.arange(n), g)
        theta = np.full(n, theta0, dtype=np.float64)
        theta[(rows + cols) % 2 == 1] += delta
        return theta
    raise ConfigurationError(f"unknown theta mode {mode!r}")


@dataclass(frozen=True)
class ReservoirConfig:
    """Gains, offsets, and noise level of the recurrent update."""

    n: int
    beta: float = 0.8
    gamma: float = 0.25
    alpha: float = 0.9
    e0_sq: float | np.ndarray = 1.0
    theta: float | np.ndarray = DEFAULT_THETA0
    noise_state_sigma: float = 1e-2
    seed: int = 0

    def validate(self):
        grid_side(self.n)
        for name in ("beta", "gamma", "alpha", "noise_state_sigma"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        for name in ("e0_sq", "theta"):
            value = getattr(self, name)
            if isinstance(value, np.ndarray) and value.shape != (self.n,):
                raise ConfigurationError(f"{name} must have exactly n={self.n} entries")
        if np.any(self.e0_sq_vector() < 0):
            raise ConfigurationError("e0_sq entries must be >= 0")

    def e0_sq_vector(self):
        return np.array(
            np.broadcast_to(np.asarray(self.e0_sq, dtype=np.float64), (self.n,))
        )

    def theta_vector(self):
        return np.array(
            np.broadcast_to(np.asarray(self.theta, dtype=np.float64), (self.n,))
        )


@dataclass
class ReservoirState:
    """Neuron intensities at one discrete step."""

    x: np.ndarray
    step: int = 0


@dataclass(frozen=True)
class CouplingMatrix:
    """Sparse non-negative coupling weights in CSR form, row per destination."""

    n: int
    data: np.ndarray
    indices: np.ndarray
    indptr: np.ndarray

    def row_sums(self):
        return np.add.reduceat(self.data, self.indptr[:-1].astype(np.intp))

    def to_dense(self):
        dense = np.zeros((self.n, self.n))
        for i in range(self.n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            dense[i, self.indices[lo:hi]] = self.data[lo:hi]
        return dense

    @property
    def nnz(self):
        return self.data.shape[0]


def build_injection_weights(n, seed):
    """n i.i.d. uniform [0,1] injection weights, reproducible per seed."""
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=n)


def build_doe_coupling(n, kernel_radius, seed):
    """Local coupling on the g x g grid standing in for the diffractive element.

    Each neuron couples to all grid neighbors within Chebyshev distance
    ``kernel_radius`` (itself included) with a Gaussian weight profile of
    sigma = kernel_radius/2 over Euclidean grid distance; a seeded ±20%
    multiplicative jitter emulates optical inhomogeneity. Rows are
    normalized to sum to 1, which keeps the cos^2 argument bounded.
    Radius 0 degenerates to the identity.
    """
    g = grid_side(n)
    if kernel_radius < 0:
        raise ConfigurationError(f"kernel_radius must be >= 0, got {kernel_radius}")
    rng = np.random.default_rng(seed)

    data = []
    indices = []
    indptr = np.zeros(n + 1, dtype=np.int64)
    r = int(kernel_radius)
    sigma = r / 2.0 if r > 0 else 1.0
    for i in range(n):
        row, col = divmod(i, g)
        weights = []
        cols = []
        for dr in range(-r, r + 1):
            rr = row + dr
            if rr < 0 or rr >= g:
                continue
            for dc in range(-r, r + 1):
                cc = col + dc
                if cc < 0 or cc >= g:
                    continue
                w = math.exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma))
                weights.append(w)
                cols.append(rr * g + cc)
        weights = np.asarray(weights) * (1.0 + 0.2 * rng.uniform(-1.0, 1.0, len(weights)))
        weights /= weights.sum()
        data.append(weights)
        indices.append(np.asarray(cols, dtype=np.int64))
        indptr[i + 1] = indptr[i] + len(cols)
    return CouplingMatrix(
        n=n,
        data=np.concatenate(data),
        indices=np.concatenate(indices),
        indptr=indptr,
    )


def initial_state(cfg):
    """Mid-range starting point x(0) = alpha * e0_sq / 2."""
    return ReservoirState(x=0.5 * cfg.alpha * cfg.e0_sq_vector(), step=0)


def _check_dimensions(cfg, wdoe, winj, x):
    if wdoe.n != cfg.n or winj.shape != (cfg.n,) or x.shape != (cfg.n,):
        raise ConfigurationError(
            f"dimension mismatch: n={cfg.n}, coupling {wdoe.n}, "
            f"injection {winj.shape}, state {x.shape}"
        )


def step(state, u_next, cfg, wdoe, winj, noise_stream=None):
    """Advance one step; reference (uncompiled) form of the update."""
    _check_dimensions(cfg, wdoe, winj, state.x)
    e = np.sqrt(state.x)
    s = np.add.reduceat(wdoe.data * e[wdoe.indices], wdoe.indptr[:-1].astype(np.intp))
    ae0 = cfg.alpha * cfg.e0_sq_vector()
    arg = (cfg.beta * cfg.alpha) * s * s + (cfg.gamma * winj) * u_next + cfg.theta_vector()
    c = np.cos(arg)
    x = ae0 * (c * c)
    if cfg.noise_state_sigma > 0 and noise_stream is not None:
        x = x + noise_stream.standard_normal(cfg.n) * (cfg.noise_state_sigma * ae0)
        np.maximum(x, 0.0, out=x)
    return ReservoirState(x=x, step=state.step + 1)


def run(inputs, cfg, wdoe, winj, warmup=0, rng=None, start=None):
    """Drive the network over an input sequence.

    Starts from ``start`` (default: mid-range ``initial_state``), discards the
    first ``warmup`` steps, and returns the retained (T-warmup, n) state matrix
    together with the matching slice of inputs. When ``cfg.noise_state_sigma``
    is positive, noise is drawn from ``rng`` (default: a fresh generator seeded
    with ``cfg.seed``); passing a persistent generator redraws noise per call.
    """
    u = np.ascontiguousarray(getattr(inputs, "values", inputs), dtype=np.float64)
    if u.ndim != 1:
        raise ConfigurationError("inputs must be a one-dimensional sequence")
    if warmup < 0 or u.shape[0] < warmup + 1:
        raise ConfigurationError(
            f"need at least warmup+1={warmup + 1} inputs, got {u.shape[0]}"
        )
    state = initial_state(cfg) if start is None else start
    x0 = np.ascontiguousarray(state.x, dtype=np.float64)
    _check_dimensions(cfg, wdoe, winj, x0)

    ae0 = cfg.alpha * cfg.e0_sq_vector()
    noise = None
    if cfg.noise_state_sigma > 0:
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        noise = rng.standard_normal((u.shape[0], cfg.n)) * (cfg.noise_state_sigma * ae0)
        noise = np.ascontiguousarray(noise)

    states = _kernels.reservoir_run(
        x0, u, wdoe.data, wdoe.indices, wdoe.indptr,
        np.ascontiguousarray(cfg.gamma * winj), cfg.theta_vector(),
        cfg.beta * cfg.alpha, ae0, noise,
    )
    return states[warmup:], u[warmup:]


def save_states_csv(states, path):
    """Write a state matrix as CSV with header x_0..x_{n-1}."""
    n = states.shape[1]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(f"x_{i}" for i in range(n)) + "\n")
        for row in states:
            fh.write(",".join(f"{float(v)!r}" for v in row) + "\n")
