"""Command-line front door.

    rgreedy <generate|train|landscape|scaling|plot> --config FILE
            [--jobs K] [--out DIR] [--seed-offset S]

Exit codes: 0 success, 2 configuration error, 3 I/O error. The environment
variable ``RGREEDY_OUT`` overrides ``--out``, which overrides the config's
``output_dir``.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, experiments, learner, svgplot, timeseries
from .config import load_config
from .errors import CsvFormatError, RGreedyError


def _resolve_out(args, cfg):
    env = os.environ.get("RGREEDY_OUT")
    if env:
        return Path(env)
    if args.out is not None:
        return Path(args.out)
    return Path(cfg.output_dir)


def _write_json(path, payload):
    with open(path, "w", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv(path, expected_header=None):
    """Read a numeric CSV; malformed content raises with the line number."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CsvFormatError(f"{path}:1: empty CSV")
    header = lines[0].split(",")
    if expected_header is not None and header != expected_header:
        raise CsvFormatError(
            f"{path}:1: expected header {','.join(expected_header)!r}, "
            f"got {lines[0]!r}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != len(header):
            raise CsvFormatError(
                f"{path}:{lineno}: expected {len(header)} columns, got {len(parts)}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise CsvFormatError(
                f"{path}:{lineno}: non-numeric value in {line!r}"
            ) from None
    if not rows:
        raise CsvFormatError(f"{path}:2: no data rows")
    return header, np.asarray(rows)


def cmd_generate(args):
    cfg = load_config(args.config)
    out = _resolve_out(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    series = timeseries.generate_mackey_glass(
        cfg.mackey_glass, cfg.series.n_points, seed=cfg.series.seed,
        jitter=cfg.series.jitter,
    )
    path = out / "series.csv"
    timeseries.save_csv(series, path)
    values = series.values
    print(f"{path}: {len(series)} samples, mean={values.mean():.6g}, "
          f"std={values.std():.6g}")
    return 0


def _run_summary(r):
    return {
        "run_index": r.run_index,
        "learner_seed": r.learner_seed,
        "noise_seed": r.noise_seed,
        "k_opt": r.k_opt,
        "eps_opt": r.eps_opt,
        "train_nmse": r.train_nmse,
        "test_nmse": r.test_nmse,
        "hamming_weight": int(r.final_mask.sum()),
    }


def cmd_train(args):
    cfg = load_config(args.config)
    out = _resolve_out(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    results = experiments.run_ensemble(cfg, jobs=args.jobs,
                                       seed_offset=args.seed_offset, out_dir=out)
    curves = [r.curve for r in results]
    if len(curves) >= 2:
        mean, std = analysis.average_curves(curves)
    else:
        mean = curves[0].eps_accepted
        std = np.zeros_like(mean)
    analysis.save_mean_curve_csv(out / "mean_curve.csv", mean, std)
    summary = {
        "n": cfg.reservoir.n,
        "epochs": cfg.learner.epochs_for(cfg.reservoir.n),
        "ensemble": len(results),
        "seed_offset": args.seed_offset,
        "k_opt_mean": float(np.mean([r.k_opt for r in results])),
        "eps_opt_mean": float(np.mean([r.eps_opt for r in results])),
        "train_nmse_mean": float(np.mean([r.train_nmse for r in results])),
        "test_nmse_mean": float(np.mean([r.test_nmse for r in results])),
        "runs": [_run_summary(r) for r in results],
    }
    _write_json(out / "summary.json", summary)
    for r in results:
        print(f"run {r.run_index} (seed {r.learner_seed}): k_opt={r.k_opt} "
              f"eps_opt={r.eps_opt:.6g} train={r.train_nmse:.6g} "
              f"test={r.test_nmse:.6g}")
    print(f"ensemble means: eps_opt={summary['eps_opt_mean']:.6g} "
          f"train={summary['train_nmse_mean']:.6g} "
          f"test={summary['test_nmse_mean']:.6g} k_opt={summary['k_opt_mean']:.6g}")
    return 0


def _fit_or_none(values, epochs):
    try:
        fit = analysis.fit_exponential(values, epochs)
    except RGreedyError as exc:
        return {"error": str(exc)}
    return {"amplitude": fit.amplitude, "rate": fit.rate, "floor": fit.floor,
            "residual": fit.residual}


def cmd_landscape(args):
    cfg = load_config(args.config)
    out = _resolve_out(args, cfg)
    ensemble = cfg.learner.ensemble
    expected = [out / f"run_{cfg.learner.seed + args.seed_offset + r}" / "log.csv"
                for r in range(ensemble)]
    present = [p for p in expected if p.exists()]
    if len(present) == ensemble:
        curves = [learner.load_log_csv(p) for p in expected]
    elif not present:
        out.mkdir(parents=True, exist_ok=True)
        results = experiments.run_ensemble(cfg, jobs=args.jobs,
                                           seed_offset=args.seed_offset,
                                           out_dir=out)
        curves = [r.curve for r in results]
    else:
        missing = ", ".join(str(p) for p in expected if not p.exists())
        raise FileNotFoundError(
            f"incomplete ensemble logs; expected {ensemble} logs, "
            f"missing: {missing}"
        )
    split = analysis.split_gradients(curves)
    analysis.save_gradient_csv(out / "gradient_split.csv", split)

    epochs = np.arange(1, split.pos_mean.shape[0] + 1, dtype=np.float64)
    pos_ok = np.isfinite(split.pos_mean) & (split.pos_mean > 0)
    neg_abs = np.abs(split.neg_mean)
    neg_ok = np.isfinite(neg_abs) & (neg_abs > 0)
    window = max(1, cfg.reservoir.n // 10)
    kink = analysis.kink_check(curves, window)
    payload = {
        "positive_fit": _fit_or_none(split.pos_mean[pos_ok], epochs[pos_ok]),
        "negative_fit": _fit_or_none(neg_abs[neg_ok], epochs[neg_ok]),
        "kink": {
            "k_ref": kink.k_ref,
            "window": kink.window,
            "pre_mean": kink.pre_mean,
            "post_mean": kink.post_mean,
            "passed": kink.passed,
        },
    }
    _write_json(out / "fits.json", payload)
    print(f"gradient split over {len(curves)} curves; "
          f"kink around k={kink.k_ref:.1f}: pre={kink.pre_mean:.6g} "
          f"post={kink.post_mean:.6g} trend_change={kink.passed}")
    return 0


def cmd_scaling(args):
    cfg = load_config(args.config)
    out = _resolve_out(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    result, per_size = experiments.run_sweep(cfg, jobs=args.jobs,
                                             seed_offset=args.seed_offset,
                                             out_dir=out)
    analysis.save_scaling_csv(out / "scaling.csv", result.points)
    ratio = experiments.performance_ratio(result)
    payload = {
        "slope": result.slope,
        "intercept": result.intercept,
        "eps_ratio_smallest_over_largest": None if math.isnan(ratio) else ratio,
        "points": [{"n": p.n, "k_opt_mean": p.k_opt_mean, "k_opt_std": p.k_opt_std,
                    "eps_opt_mean": p.eps_opt_mean} for p in result.points],
        "ensemble": cfg.sweep.ensemble,
        "epochs_per_size": {str(n): cfg.learner.epochs_for(n)
                            for n in cfg.sweep.sizes},
    }
    _write_json(out / "scaling.json", payload)
    for p in result.points:
        print(f"n={p.n}: k_opt={p.k_opt_mean:.1f}±{p.k_opt_std:.1f} "
              f"eps_opt={p.eps_opt_mean:.6g}")
    if result.slope is None:
        print("log-log slope unavailable (need >= 3 sweep sizes)")
    else:
        print(f"log-log slope {result.slope:.3f}, "
              f"eps ratio smallest/largest {ratio:.2f}")
    return 0


def cmd_plot(args):
    cfg = load_config(args.config)
    out = _resolve_out(args, cfg)
    written = []

    path = out / "series.csv"
    if path.exists():
        _, rows = read_csv(path, ["value"])
        idx = np.arange(1, rows.shape[0] + 1)
        svg = svgplot.render_plot(
            [("input", idx, rows[:, 0], "line")],
            title="Input sequence", xlabel="sample", ylabel="value")
        svgplot.save_svg(out / "series.svg", svg)
        written.append(out / "series.svg")

    path = out / "mean_curve.csv"
    if path.exists():
        _, rows = read_csv(path, ["k", "eps_mean", "eps_std"])
        svg = svgplot.render_plot(
            [("mean accepted error", rows[:, 0], rows[:, 1], "line"),
             ("mean + std", rows[:, 0], rows[:, 1] + rows[:, 2], "dashed")],
            log_y=True, title="Learning curve", xlabel="epoch k", ylabel="error")
        svgplot.save_svg(out / "learning_curve.svg", svg)
        written.append(out / "learning_curve.svg")

    path = out / "gradient_split.csv"
    if path.exists():
        _, rows = read_csv(path,
                           ["k", "pos_mean", "neg_mean", "pos_count", "neg_count"])
        svg = svgplot.render_plot(
            [("positive gradients", rows[:, 0], rows[:, 1], "line"),
             ("|negative gradients|", rows[:, 0], np.abs(rows[:, 2]), "line")],
            log_y=True, title="Error-landscape gradients", xlabel="epoch k",
            ylabel="gradient magnitude")
        svgplot.save_svg(out / "gradient_split.svg", svg)
        written.append(out / "gradient_split.svg")

    path = out / "scaling.csv"
    if path.exists():
        _, rows = read_csv(path, ["n", "k_opt_mean", "k_opt_std", "eps_opt_mean"])
        series = [("optimal epoch", rows[:, 0], rows[:, 1], "scatter")]
        if rows.shape[0] >= 3:
            slope, intercept = analysis.fit_loglog_slope(rows[:, :2])
            xs = np.geomspace(rows[:, 0].min(), rows[:, 0].max(), 50)
            series.append((f"fit slope {slope:.2f}", xs,
                           np.exp(intercept) * xs**slope, "dashed"))
        svg = svgplot.render_plot(series, log_x=True, log_y=True,
                                  title="Convergence epoch vs network size",
                                  xlabel="neurons n", ylabel="optimal epoch")
        svgplot.save_svg(out / "scaling.svg", svg)
        written.append(out / "scaling.svg")

    if not written:
        raise FileNotFoundError(
            f"no plottable CSV found in {out} (expected series.csv, "
            f"mean_curve.csv, gradient_split.csv, or scaling.csv)"
        )
    for p in written:
        print(f"wrote {p}")
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "landscape": cmd_landscape,
    "scaling": cmd_scaling,
    "plot": cmd_plot,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rgreedy",
        description="Photonic-reservoir simulator with greedy Boolean learning",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in _COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel ensemble workers")
        p.add_argument("--out", default=None,
                       help="output directory (RGREEDY_OUT overrides)")
        p.add_argument("--seed-offset", type=int, default=0, dest="seed_offset",
                       help="added to every run seed")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RGreedyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
