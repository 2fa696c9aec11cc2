"""Experiment orchestration: single runs, ensembles, and size sweeps.

Run r of an ensemble uses learner seed ``learner.seed + seed_offset + r`` and
noise seed ``reservoir.noise_seed + seed_offset + r``; network seeds shift by
the neuron count in sweeps. Everything downstream is deterministic given the
config, so ensemble members can run in parallel and reduce by run index.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, learner, readout, reservoir, timeseries
from .analysis import ScalingPoint, ScalingResult
from .config import config_from_dict


@dataclass
class Task:
    """Normalized input series cut into drive segments and targets."""

    series: timeseries.TimeSeries
    split: timeseries.PredictionSplit
    train_drive: np.ndarray
    test_drive: np.ndarray
    warmup: int


@dataclass
class RunResult:
    run_index: int
    learner_seed: int
    noise_seed: int
    curve: analysis.LearningCurve
    final_mask: np.ndarray
    k_opt: int
    eps_opt: float
    train_nmse: float
    test_nmse: float


def prepare_task(cfg):
    """Generate, normalize, and window the input sequence.

    The training pass warms up on the tail of the training segment itself
    (the same sequence repeats every epoch); the test drive is preceded by
    the ``warmup`` samples just before the test segment.
    """
    s = cfg.series
    raw = timeseries.generate_mackey_glass(cfg.mackey_glass, s.n_points,
                                           seed=s.seed, jitter=s.jitter)
    norm = timeseries.normalize(raw)
    split = timeseries.make_prediction_pairs(norm, s.train_len, s.test_len)
    w = s.warmup
    train_drive = np.concatenate((split.train_input[len(split.train_input) - w:],
                                  split.train_input))
    test_drive = norm.values[s.train_len - w : s.train_len + s.test_len]
    return Task(series=norm, split=split, train_drive=train_drive,
                test_drive=test_drive, warmup=w)


def build_network(rs, n=None):
    """Reservoir config plus coupling and injection weights for size ``n``."""
    n = rs.n if n is None else n
    theta = reservoir.make_theta(n, rs.theta0(), rs.delta_theta(), rs.theta_mode)
    cfg = reservoir.ReservoirConfig(
        n=n, beta=rs.beta, gamma=rs.gamma, alpha=rs.alpha, e0_sq=rs.e0_sq,
        theta=theta, noise_state_sigma=rs.noise_state_sigma,
        seed=rs.noise_seed + n,
    )
    cfg.validate()
    wdoe = reservoir.build_doe_coupling(n, rs.kernel_radius, rs.coupling_seed + n)
    winj = reservoir.build_injection_weights(n, rs.injection_seed + n)
    return cfg, wdoe, winj


def run_single(cfg, n, run_index, seed_offset=0, task=None, network=None,
               out_dir=None):
    """Train one learner and score its final mask on held-out data."""
    task = task or prepare_task(cfg)
    network = network or build_network(cfg.reservoir, n)
    rcfg, wdoe, winj = network
    det = cfg.readout.detector_sigma_rel
    e0_vec = rcfg.e0_sq_vector()

    learner_seed = cfg.learner.seed + seed_offset + run_index
    noise_seed = cfg.reservoir.noise_seed + seed_offset + run_index
    rng = np.random.default_rng(noise_seed)

    if cfg.learner.frozen_states:
        states, _ = reservoir.run(task.train_drive, rcfg, wdoe, winj,
                                  warmup=task.warmup, rng=rng)
        evaluator = learner.FrozenEvaluator(states, e0_vec, task.split.train_target,
                                            rng=rng, detector_sigma_rel=det)
    else:
        evaluator = learner.FreshEvaluator(task.train_drive, task.warmup, rcfg,
                                           wdoe, winj, task.split.train_target,
                                           rng=rng, detector_sigma_rel=det)

    state = learner.init_learner(n, learner_seed)
    epochs = cfg.learner.epochs_for(n)
    curve, final_mask = learner.train(state, evaluator, epochs)
    curve.meta.update(n=n, run_index=run_index, learner_seed=learner_seed,
                      noise_seed=noise_seed, epochs=epochs)

    # Final-mask pass over the training drive fixes the normalization
    # statistics reused on the held-out data.
    if cfg.learner.frozen_states:
        final_states = evaluator.states
    else:
        final_states, _ = reservoir.run(task.train_drive, rcfg, wdoe, winj,
                                        warmup=task.warmup, rng=rng)
    raw_train = readout.readout_output(final_states, e0_vec, final_mask,
                                       rng=rng, detector_sigma_rel=det)
    train_trace = readout.normalize_output(raw_train)
    target_trace = readout.normalize_output(task.split.train_target)
    train_nmse = readout.nmse(train_trace.normalized, target_trace.normalized)

    test_states, _ = reservoir.run(task.test_drive, rcfg, wdoe, winj,
                                   warmup=task.warmup, rng=rng)
    raw_test = readout.readout_output(test_states, e0_vec, final_mask,
                                      rng=rng, detector_sigma_rel=det)
    y_test = readout.apply_normalization(raw_test, train_trace.norm_mean,
                                         train_trace.norm_std)
    t_test = readout.apply_normalization(task.split.test_target,
                                         target_trace.norm_mean,
                                         target_trace.norm_std)
    test_nmse = readout.nmse(y_test, t_test)

    k_opt = analysis.find_optimal_epoch(curve)
    result = RunResult(
        run_index=run_index, learner_seed=learner_seed, noise_seed=noise_seed,
        curve=curve, final_mask=final_mask, k_opt=k_opt,
        eps_opt=float(curve.eps_accepted[k_opt - 1]),
        train_nmse=train_nmse, test_nmse=test_nmse,
    )
    if out_dir is not None:
        run_dir = Path(out_dir) / f"run_{learner_seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        learner.save_log_csv(run_dir / "log.csv", curve.eps0, state.history, n)
        learner.save_mask(run_dir / "mask.txt", final_mask)
    return result


def _pool_worker(args):
    cfg_dict, n, run_index, seed_offset, out_dir = args
    cfg = config_from_dict(cfg_dict)
    return run_single(cfg, n, run_index, seed_offset=seed_offset, out_dir=out_dir)


def run_ensemble(cfg, n=None, ensemble=None, jobs=1, seed_offset=0, out_dir=None):
    """Independent learners from the shared initial mask, ordered by run index."""
    n = cfg.reservoir.n if n is None else n
    ensemble = cfg.learner.ensemble if ensemble is None else ensemble
    if jobs > 1 and ensemble > 1:
        args = [(cfg.to_dict(), n, r, seed_offset,
                 str(out_dir) if out_dir is not None else None)
                for r in range(ensemble)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_pool_worker, args))
    task = prepare_task(cfg)
    network = build_network(cfg.reservoir, n)
    return [run_single(cfg, n, r, seed_offset=seed_offset, task=task,
                       network=network, out_dir=out_dir)
            for r in range(ensemble)]


def run_sweep(cfg, jobs=1, seed_offset=0, out_dir=None):
    """Ensembles at every sweep size plus the log-log convergence fit."""
    points = []
    per_size = {}
    for n in cfg.sweep.sizes:
        size_dir = None if out_dir is None else Path(out_dir) / f"n_{n}"
        results = run_ensemble(cfg, n=n, ensemble=cfg.sweep.ensemble, jobs=jobs,
                               seed_offset=seed_offset, out_dir=size_dir)
        k_opts = np.array([r.k_opt for r in results], dtype=np.float64)
        eps_opts = np.array([r.eps_opt for r in results])
        points.append(ScalingPoint(n=n, k_opt_mean=float(k_opts.mean()),
                                   k_opt_std=float(k_opts.std()),
                                   eps_opt_mean=float(eps_opts.mean())))
        per_size[n] = results
    slope = intercept = None
    if len(points) >= 3:
        slope, intercept = analysis.fit_loglog_slope(
            [(p.n, p.k_opt_mean) for p in points]
        )
    return ScalingResult(points=points, slope=slope, intercept=intercept), per_size


def performance_ratio(result):
    """Mean optimal error of the smallest sweep size over the largest."""
    by_n = sorted(result.points, key=lambda p: p.n)
    if len(by_n) < 2 or by_n[-1].eps_opt_mean == 0:
        return math.nan
    return by_n[0].eps_opt_mean / by_n[-1].eps_opt_mean
