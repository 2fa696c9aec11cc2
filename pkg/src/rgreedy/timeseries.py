"""Mackey-Glass input generation, normalization, and prediction windowing."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DegenerateSeriesError


@dataclass(frozen=True)
class MackeyGlassParams:
    """Parameters of the delay flow dx/dt = a*x(t-tau)/(1+x(t-tau)**exponent) - b*x(t).

    Defaults are the canonical chaotic operating point (a=0.2, b=0.1, tau=17,
    exponent=10). One emitted sample spans ``subsample`` integrator steps, so
    the default dt=0.1, subsample=10 yields unit spacing between samples.
    """

    a: float = 0.2
    b: float = 0.1
    tau: float = 17.0
    exponent: float = 10.0
    dt: float = 0.1
    subsample: int = 10
    x0: float = 1.2

    def validate(self):
        if not (self.dt > 0):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if not (self.tau > 0):
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if self.subsample < 1:
            raise ConfigurationError(f"subsample must be >= 1, got {self.subsample}")
        ratio = self.tau / self.dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigurationError(
                f"tau/dt must be an integer (delay buffer alignment), got {ratio}"
            )

    @property
    def tau_steps(self):
        return int(round(self.tau / self.dt))


@dataclass
class TimeSeries:
    """A scalar sequence plus the statistics recorded when it was normalized."""

    values: np.ndarray
    origin: str = "raw"  # "raw" or "normalized"
    mean: float | None = None
    std: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ConfigurationError("series values must be one-dimensional")

    def __len__(self):
        return self.values.shape[0]


class PredictionSplit(NamedTuple):
    train_input: np.ndarray
    train_target: np.ndarray
    test_input: np.ndarray
    test_target: np.ndarray


def generate_mackey_glass(params, n_points, seed, jitter=1e-6):
    """Generate ``n_points`` samples of the chaotic flow.

    Integration is fixed-step RK4 over a constant initial history of value
    ``params.x0``; a transient of 10*tau time units is discarded before
    sampling every ``params.subsample``-th step. ``seed`` perturbs each
    history slot by a reproducible jitter of scale ``jitter`` so distinct
    seeds decorrelate; pass jitter=0 for an exactly constant history.
    """
    params.validate()
    if n_points < 1:
        raise ConfigurationError(f"n_points must be >= 1, got {n_points}")
    tau_steps = params.tau_steps
    transient_steps = 10 * tau_steps
    n_steps = transient_steps + n_points * params.subsample

    history = np.full(tau_steps + 1, params.x0, dtype=np.float64)
    if jitter:
        rng = np.random.default_rng(seed)
        history += jitter * rng.standard_normal(tau_steps + 1)

    grid = _kernels.mackey_glass_grid(
        params.a, params.b, params.exponent, params.dt, tau_steps, n_steps, history
    )
    start = tau_steps + transient_steps
    values = grid[start + params.subsample :: params.subsample][:n_points].copy()
    return TimeSeries(values=values, origin="raw")


def normalize(series):
    """Return a zero-mean unit-std copy, recording the raw mean and std.

    Uses the population (1/T) standard deviation. Raises
    ``DegenerateSeriesError`` when the input has no variance.
    """
    values = series.values
    mean = float(np.mean(values))
    std = float(np.std(values))
    if not std > 0.0:
        raise DegenerateSeriesError("cannot normalize a zero-variance series")
    return TimeSeries(values=(values - mean) / std, origin="normalized",
                      mean=mean, std=std)


def make_prediction_pairs(series, train_len, test_len):
    """Split into one-step-ahead (input, target) pairs for train and test.

    The input at step n is u(n+1) and the target is u(n+2): the target
    sequence is the input sequence shifted by one. The test inputs start
    right after the training inputs, so the two input segments are disjoint.
    """
    if train_len < 1 or test_len < 1:
        raise ConfigurationError("train_len and test_len must be >= 1")
    values = series.values
    if len(values) < train_len + test_len + 2:
        raise ConfigurationError(
            f"series of length {len(values)} too short for "
            f"train_len={train_len} + test_len={test_len} + 2"
        )
    return PredictionSplit(
        train_input=values[:train_len],
        train_target=values[1 : train_len + 1],
        test_input=values[train_len : train_len + test_len],
        test_target=values[train_len + 1 : train_len + test_len + 1],
    )


def save_csv(series, path):
    """Write the series as a one-column CSV with a ``value`` header."""
    with open(path, "w", newline="") as fh:
        fh.write("value\n")
        for v in series.values:
            fh.write(f"{float(v)!r}\n")
