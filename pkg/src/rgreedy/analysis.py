"""Ensemble statistics over learning curves, gradient splits, and fits."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, FitFailureError


@dataclass
class LearningCurve:
    """Tested and accepted error per epoch; ``eps0`` is the initial-mask error."""

    eps0: float
    eps_tested: np.ndarray
    eps_accepted: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps_tested = np.asarray(self.eps_tested, dtype=np.float64)
        self.eps_accepted = np.asarray(self.eps_accepted, dtype=np.float64)
        if self.eps_tested.shape != self.eps_accepted.shape:
            raise ConfigurationError("tested and accepted curves differ in length")

    @property
    def k_max(self):
        return self.eps_tested.shape[0]


@dataclass
class GradientSplit:
    """Per-epoch means of positive and non-positive error gradients.

    Epochs where a set is empty hold NaN in the mean and 0 in the count.
    """

    pos_mean: np.ndarray
    neg_mean: np.ndarray
    pos_count: np.ndarray
    neg_count: np.ndarray


@dataclass
class ExponentialFit:
    """Parameters of amplitude * exp(-k / rate) + floor."""

    amplitude: float
    rate: float
    floor: float
    residual: float


@dataclass
class ScalingPoint:
    n: int
    k_opt_mean: float
    k_opt_std: float
    eps_opt_mean: float


@dataclass
class ScalingResult:
    points: list
    slope: float | None
    intercept: float | None


def average_curves(curves):
    """Pointwise mean and population std of the accepted-error curves."""
    if len(curves) < 2:
        raise ConfigurationError("need at least 2 curves to average")
    lengths = {c.k_max for c in curves}
    if len(lengths) != 1:
        raise ConfigurationError(f"curves differ in length: {sorted(lengths)}")
    stacked = np.stack([c.eps_accepted for c in curves])
    return stacked.mean(axis=0), stacked.std(axis=0)


def gradient_deltas(curve):
    """Per-epoch local error change: best accepted before the epoch minus tested."""
    prev_min = np.concatenate(([curve.eps0], curve.eps_accepted[:-1]))
    return prev_min - curve.eps_tested


def gradient_split(curve):
    """Sign-split gradient contribution of a single curve."""
    return split_gradients([curve])


def split_gradients(curves):
    """Ensemble gradient split: per-epoch mean over each sign set."""
    if not curves:
        raise ConfigurationError("need at least 1 curve")
    lengths = {c.k_max for c in curves}
    if len(lengths) != 1:
        raise ConfigurationError(f"curves differ in length: {sorted(lengths)}")
    deltas = np.stack([gradient_deltas(c) for c in curves])
    pos = deltas > 0
    pos_count = pos.sum(axis=0)
    neg_count = (~pos).sum(axis=0)
    with np.errstate(invalid="ignore"):
        pos_mean = np.where(pos_count > 0,
                            np.where(pos, deltas, 0.0).sum(axis=0) / pos_count, np.nan)
        neg_mean = np.where(neg_count > 0,
                            np.where(~pos, deltas, 0.0).sum(axis=0) / neg_count, np.nan)
    return GradientSplit(pos_mean=pos_mean, neg_mean=neg_mean,
                         pos_count=pos_count, neg_count=neg_count)


def find_optimal_epoch(curve):
    """First epoch (1-indexed) attaining the minimum accepted error."""
    if curve.k_max < 1:
        raise ConfigurationError("curve is empty")
    return int(np.argmin(curve.eps_accepted)) + 1


def _fit_linear_pair(k, values, b):
    basis = np.column_stack((np.exp(-k / b), np.ones_like(k)))
    coef, _, _, _ = np.linalg.lstsq(basis, values, rcond=None)
    resid = values - basis @ coef
    return coef, float(resid @ resid)


def fit_exponential(values, epochs=None):
    """Least-squares fit of a*exp(-k/b)+c over positive curve values.

    The rate b is scanned on a log grid with the closed-form linear solve for
    (a, c) at each candidate, then refined by golden-section search. Raises
    ``FitFailureError`` when no candidate produces a finite residual.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] < 4:
        raise ConfigurationError("need at least 4 curve values to fit")
    if not np.all(np.isfinite(values)) or np.any(values <= 0):
        raise ConfigurationError("fit requires finite positive curve values")
    k = np.arange(1, values.shape[0] + 1, dtype=np.float64) if epochs is None \
        else np.asarray(epochs, dtype=np.float64)
    if k.shape != values.shape:
        raise ConfigurationError("epoch and value arrays differ in length")

    grid = np.geomspace(0.3, 50.0 * values.shape[0], 90)
    sses = np.array([_fit_linear_pair(k, values, b)[1] for b in grid])
    if not np.any(np.isfinite(sses)):
        raise FitFailureError(
            f"no finite residual on the rate grid [{grid[0]:g}, {grid[-1]:g}]"
        )
    best = int(np.nanargmin(sses))
    lo = math.log(grid[max(best - 1, 0)])
    hi = math.log(grid[min(best + 1, grid.shape[0] - 1)])

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    u1 = hi - invphi * (hi - lo)
    u2 = lo + invphi * (hi - lo)
    f1 = _fit_linear_pair(k, values, math.exp(u1))[1]
    f2 = _fit_linear_pair(k, values, math.exp(u2))[1]
    for _ in range(90):
        if f1 <= f2:
            hi, u2, f2 = u2, u1, f1
            u1 = hi - invphi * (hi - lo)
            f1 = _fit_linear_pair(k, values, math.exp(u1))[1]
        else:
            lo, u1, f1 = u1, u2, f2
            u2 = lo + invphi * (hi - lo)
            f2 = _fit_linear_pair(k, values, math.exp(u2))[1]
    b = math.exp((lo + hi) / 2.0)
    (a, c), sse = _fit_linear_pair(k, values, b)
    if not (np.isfinite(a) and np.isfinite(c) and np.isfinite(sse)):
        raise FitFailureError(f"fit diverged at rate b={b:g} (sse={sse!r})")
    return ExponentialFit(amplitude=float(a), rate=float(b), floor=float(c),
                          residual=math.sqrt(sse))


def fit_loglog_slope(points):
    """Ordinary least squares of log(k_opt) on log(n); returns (slope, intercept)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise ConfigurationError("need at least 3 (n, k_opt) points")
    if np.any(pts <= 0):
        raise ConfigurationError("log-log fit requires positive data")
    slope, intercept = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
    return float(slope), float(intercept)


@dataclass
class KinkCheck:
    """Positive-gradient means in windows before and after the convergence epoch."""

    k_ref: float
    window: int
    pre_mean: float
    post_mean: float
    passed: bool
    per_curve: list  # (pre, post, passed) per curve, pooled positive deltas


def _window_positive_mean(deltas, lo, hi):
    """Mean of positive deltas with epoch index in (lo, hi]; NaN when empty."""
    k = np.arange(1, deltas.shape[0] + 1)
    sel = deltas[(k > lo) & (k <= hi) & (deltas > 0)]
    return float(sel.mean()) if sel.size else math.nan


def kink_check(curves, window, k_ref=None):
    """Probe the post-convergence trend change of the positive gradients.

    ``k_ref`` defaults to the ensemble mean optimal epoch. The ensemble-level
    comparison averages the per-epoch positive-set means inside each window;
    the per-curve entries pool each curve's own positive deltas around the
    shared reference epoch.
    """
    if k_ref is None:
        k_ref = float(np.mean([find_optimal_epoch(c) for c in curves]))
    split = split_gradients(curves)
    k = np.arange(1, split.pos_mean.shape[0] + 1)
    pre_sel = (k > k_ref - window) & (k <= k_ref)
    post_sel = (k > k_ref) & (k <= k_ref + window)
    with np.errstate(invalid="ignore"):
        pre = float(np.nanmean(split.pos_mean[pre_sel])) if np.any(
            np.isfinite(split.pos_mean[pre_sel])) else math.nan
        post = float(np.nanmean(split.pos_mean[post_sel])) if np.any(
            np.isfinite(split.pos_mean[post_sel])) else math.nan
    per_curve = []
    for c in curves:
        deltas = gradient_deltas(c)
        c_pre = _window_positive_mean(deltas, k_ref - window, k_ref)
        c_post = _window_positive_mean(deltas, k_ref, k_ref + window)
        per_curve.append((c_pre, c_post,
                          bool(c_post > c_pre) if math.isfinite(c_post) and
                          math.isfinite(c_pre) else False))
    return KinkCheck(k_ref=k_ref, window=window, pre_mean=pre, post_mean=post,
                     passed=bool(post > pre), per_curve=per_curve)


def save_mean_curve_csv(path, mean, std):
    with open(path, "w", newline="") as fh:
        fh.write("k,eps_mean,eps_std\n")
        for i in range(mean.shape[0]):
            fh.write(f"{i + 1},{float(mean[i])!r},{float(std[i])!r}\n")


def save_gradient_csv(path, split):
    with open(path, "w", newline="") as fh:
        fh.write("k,pos_mean,neg_mean,pos_count,neg_count\n")
        for i in range(split.pos_mean.shape[0]):
            fh.write(f"{i + 1},{float(split.pos_mean[i])!r},{float(split.neg_mean[i])!r},"
                     f"{int(split.pos_count[i])},{int(split.neg_count[i])}\n")


def save_scaling_csv(path, points):
    with open(path, "w", newline="") as fh:
        fh.write("n,k_opt_mean,k_opt_std,eps_opt_mean\n")
        for p in points:
            fh.write(f"{p.n},{p.k_opt_mean!r},{p.k_opt_std!r},{p.eps_opt_mean!r}\n")
