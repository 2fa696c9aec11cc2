"""Greedy Boolean learning of the readout mask.

One learning epoch: pick a position by biased random selection, flip that
single mask bit, measure the prediction error, keep the flip only on strict
improvement over the best accepted error, then update the selection bias so
untested positions become more likely. The accepted-error sequence is
non-increasing by construction, even with noisy evaluations.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import readout, reservoir
from .analysis import LearningCurve
from .errors import ConfigurationError, DegenerateOutputError


@dataclass
class LearnerState:
    """Mutable learner bookkeeping across epochs."""

    mask: np.ndarray
    w_bias: np.ndarray
    rng: np.random.Generator
    eps_min: float = math.inf
    k: int = 0
    # rows (k, l_k, eps_tested, eps_accepted, reward, hamming_weight)
    history: list = field(default_factory=list)


def init_learner(n, seed, initial_mask=None):
    """Fresh learner: uniform random selection bias, best error at +inf.

    The default initial mask is all-ones (every mirror toward the detector),
    which gives a nonzero initial output for any nonempty network and serves
    as the shared starting configuration for ensembles.
    """
    if initial_mask is None:
        mask = readout.all_ones_mask(n)
    else:
        mask = readout.make_mask(initial_mask).copy()
        if mask.shape != (n,):
            raise ConfigurationError(f"initial mask must have length {n}")
    rng = np.random.default_rng(seed)
    return LearnerState(mask=mask, w_bias=rng.uniform(0.0, 1.0, size=n), rng=rng)


def select_position(state):
    """Biased position draw: argmax of fresh uniforms times the bias vector.

    Ties resolve to the lowest index, so an all-zero product degenerates to
    position 0.
    """
    r = state.rng.random(state.w_bias.shape[0])
    return int(np.argmax(r * state.w_bias))


def reward(eps_k, eps_prev):
    """1 on strict improvement, 0 otherwise (ties rejected)."""
    return 1 if eps_k < eps_prev else 0


def apply_reward(state, l_k, r, eps_k):
    """Keep the tested flip and record its error, or flip the bit back."""
    if r:
        state.eps_min = eps_k
    else:
        state.mask[l_k] ^= 1
    return state


def update_bias(state, l_k):
    """Raise every bias by 1/n, then zero the just-tested position."""
    state.w_bias += 1.0 / state.w_bias.shape[0]
    state.w_bias[l_k] = 0.0
    return state


def _evaluate(evaluator, mask):
    try:
        return float(evaluator(mask))
    except DegenerateOutputError:
        return math.inf


def train(state, evaluator, epochs, eps0=None):
    """Run greedy epochs against an evaluator mapping mask -> error.

    ``eps0`` (the error of the initial mask) is evaluated once when not
    supplied; it is the comparison point for the first epoch. Degenerate
    evaluations (all-zero mask output) score +inf and are rejected. Returns
    the learning curve and a copy of the final accepted mask.
    """
    if epochs < 1:
        raise ConfigurationError(f"epochs must be >= 1, got {epochs}")
    if eps0 is None:
        eps0 = _evaluate(evaluator, state.mask)
    state.eps_min = eps0
    eps_tested = np.empty(epochs)
    eps_accepted = np.empty(epochs)
    for k in range(1, epochs + 1):
        l_k = select_position(state)
        state.mask[l_k] ^= 1
        eps_k = _evaluate(evaluator, state.mask)
        r = reward(eps_k, state.eps_min)
        apply_reward(state, l_k, r, eps_k)
        update_bias(state, l_k)
        state.k = k
        eps_tested[k - 1] = eps_k
        eps_accepted[k - 1] = state.eps_min
        state.history.append((k, l_k, eps_k, state.eps_min, r, int(state.mask.sum())))
    curve = LearningCurve(eps0=eps0, eps_tested=eps_tested, eps_accepted=eps_accepted)
    return curve, state.mask.copy()


class FrozenEvaluator:
    """Error of a mask against a fixed state matrix (no per-epoch reservoir noise).

    Recomputes only the readout each call; optional detector noise still
    redraws from ``rng``.
    """

    def __init__(self, states, e0_sq, target, rng=None, detector_sigma_rel=0.0):
        if states.shape[0] != np.shape(target)[0]:
            raise ConfigurationError("state matrix and target length differ")
        self.states = states
        self.e0_sq = e0_sq
        self.rng = rng
        self.detector_sigma_rel = detector_sigma_rel
        self.target_norm = readout.normalize_output(np.asarray(target)).normalized

    def __call__(self, mask):
        raw = readout.readout_output(self.states, self.e0_sq, mask,
                                     rng=self.rng,
                                     detector_sigma_rel=self.detector_sigma_rel)
        return readout.nmse(readout.normalize_output(raw).normalized, self.target_norm)


class FreshEvaluator:
    """Error of a mask with the reservoir re-driven under fresh noise per epoch.

    Mirrors hardware, where every epoch is a new analogue pass of the same
    training sequence. All noise (state and detector) flows from the single
    ``rng`` stream, so a seeded generator reproduces a whole training run.
    """

    def __init__(self, drive, warmup, cfg, wdoe, winj, target, rng,
                 detector_sigma_rel=0.0):
        self.drive = np.asarray(getattr(drive, "values", drive), dtype=np.float64)
        self.warmup = warmup
        self.cfg = cfg
        self.wdoe = wdoe
        self.winj = winj
        self.rng = rng
        self.detector_sigma_rel = detector_sigma_rel
        self.target_norm = readout.normalize_output(np.asarray(target)).normalized
        if self.drive.shape[0] - warmup != self.target_norm.shape[0]:
            raise ConfigurationError("retained drive length and target length differ")

    def __call__(self, mask):
        states, _ = reservoir.run(self.drive, self.cfg, self.wdoe, self.winj,
                                  warmup=self.warmup, rng=self.rng)
        raw = readout.readout_output(states, self.cfg.e0_sq_vector(), mask,
                                     rng=self.rng,
                                     detector_sigma_rel=self.detector_sigma_rel)
        return readout.nmse(readout.normalize_output(raw).normalized, self.target_norm)


def save_log_csv(path, eps0, history, initial_hamming):
    """Write the per-epoch training log; row k=0 records the initial mask."""
    with open(path, "w", newline="") as fh:
        fh.write("k,l_k,eps_tested,eps_accepted,reward,hamming_weight\n")
        fh.write(f"0,-1,{eps0!r},{eps0!r},0,{initial_hamming}\n")
        for k, l_k, eps_t, eps_a, r, hamming in history:
            fh.write(f"{k},{l_k},{eps_t!r},{eps_a!r},{r},{hamming}\n")


def save_mask(path, mask):
    """Write the mask as a single line of 0/1 characters."""
    with open(path, "w", newline="") as fh:
        fh.write("".join(str(int(b)) for b in mask) + "\n")


def load_log_csv(path):
    """Read a training log back into (eps0, curve). Inverse of ``save_log_csv``."""
    rows = np.genfromtxt(path, delimiter=",", skip_header=1)
    rows = np.atleast_2d(rows)
    if rows.shape[1] != 6:
        raise ConfigurationError(f"unexpected training log shape in {path}")
    eps0 = float(rows[0, 2])
    return LearningCurve(eps0=eps0, eps_tested=rows[1:, 2].copy(),
                         eps_accepted=rows[1:, 3].copy())
