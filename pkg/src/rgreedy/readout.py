"""Boolean masked readout, output normalization, and the NMSE objective.

The detector signal for one step is the squared magnitude of the masked sum
of field deviations from the illumination amplitude:

    y(n+1) = ( sum_i mask_i * (sqrt(e0_sq_i) - sqrt(x_i(n+1))) )^2

with the proportionality constant fixed to 1; any physical scale is absorbed
by the normalization.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateOutputError


def make_mask(bits):
    """Validate and return a Boolean readout mask as a uint8 array."""
    mask = np.asarray(bits, dtype=np.uint8)
    if mask.ndim != 1:
        raise ConfigurationError("mask must be one-dimensional")
    if not np.all((mask == 0) | (mask == 1)):
        raise ConfigurationError("mask entries must be strictly Boolean (0 or 1)")
    return mask


def all_ones_mask(n):
    return np.ones(n, dtype=np.uint8)


@dataclass
class OutputTrace:
    """Raw and normalized detector trace plus the statistics used to normalize."""

    raw: np.ndarray
    normalized: np.ndarray
    norm_mean: float
    norm_std: float


def readout_output(states, e0_sq, mask, rng=None, detector_sigma_rel=0.0):
    """Raw detector trace over a state matrix, one value per retained step.

    ``detector_sigma_rel`` adds Gaussian noise of std relative to the trace
    maximum (drawn from ``rng``), emulating the photodiode; leave it at 0 for
    exactness tests.
    """
    states = np.asarray(states, dtype=np.float64)
    mask = np.asarray(mask)
    n = states.shape[1]
    if mask.shape != (n,):
        raise ConfigurationError(
            f"mask length {mask.shape} does not match state columns {n}"
        )
    e0 = np.sqrt(np.broadcast_to(np.asarray(e0_sq, dtype=np.float64), (n,)))
    amplitude = (e0[None, :] - np.sqrt(states)) @ mask.astype(np.float64)
    raw = amplitude * amplitude
    if detector_sigma_rel > 0 and rng is not None:
        scale = detector_sigma_rel * float(np.max(raw, initial=0.0))
        if scale > 0:
            raw = raw + rng.standard_normal(raw.shape[0]) * scale
    return raw


def normalize_output(raw):
    """Center and scale a raw trace by its own offset and population std.

    The statistics are recorded on the returned trace so they can be reused
    on held-out data. A constant trace (e.g. from an all-zero mask) raises
    ``DegenerateOutputError``.
    """
    raw = np.asarray(raw, dtype=np.float64)
    mean = float(np.mean(raw))
    std = float(np.std(raw))
    if not std > 0.0:
        raise DegenerateOutputError("readout trace has zero variance")
    return OutputTrace(raw=raw, normalized=(raw - mean) / std,
                       norm_mean=mean, norm_std=std)


def apply_normalization(raw, mean, std):
    """Normalize a trace with previously recorded statistics (test-time reuse)."""
    if not std > 0.0:
        raise DegenerateOutputError("normalization std must be positive")
    return (np.asarray(raw, dtype=np.float64) - mean) / std


def nmse(y_norm, target_norm):
    """Mean squared error between two normalized traces of equal length."""
    y = np.asarray(y_norm, dtype=np.float64)
    t = np.asarray(target_norm, dtype=np.float64)
    if y.shape != t.shape or y.ndim != 1 or y.shape[0] < 1:
        raise ConfigurationError(f"trace length mismatch: {y.shape} vs {t.shape}")
    d = t - y
    return float(np.mean(d * d))


def save_trace_csv(path, target, trace):
    """Write per-step columns: step, target, y_raw, y_norm, error."""
    with open(path, "w", newline="") as fh:
        fh.write("step,target,y_raw,y_norm,error\n")
        for i in range(trace.raw.shape[0]):
            t = float(target[i])
            yn = float(trace.normalized[i])
            fh.write(f"{i},{t!r},{float(trace.raw[i])!r},{yn!r},{t - yn!r}\n")
