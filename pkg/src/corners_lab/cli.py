"""Command line front end: ``corners-lab <subcommand> [flags]``.

Subcommands
-----------
sample      corners process samples as CSV
swap        corners samples pushed through one level swap, as CSV
sweep       corners samples pushed through the global shift sweep, as CSV
rbm         reflected Brownian motions at time t (optionally a trajectory)
verify      run a named experiment and write its JSON report
plot-data   ecdf / histogram / qq rows from one-column sample files

Values come from ``--config`` (``key = value`` lines) with command line flags
taking precedence; the seed falls back to ``CORNERS_LAB_SEED`` and then 42.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

import numpy as np

from .arrays import to_csv
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, load_config_file, parse_value, run_experiment
from .rbm import RbmConfig, simulate_reflected_system, simulate_trajectory, write_trajectory_csv
from .rmt import sample_corners_process
from .rng import RngStream, seed_from_env
from .swaps import global_shift_sweep, level_swap

__all__ = ["main", "build_parser", "emit_plot_data"]

PLOT_KINDS = ("ecdf", "histogram", "qq")


def emit_plot_data(samples, kind: str, reference=None, bins: int = 50) -> str:
    """CSV rows for an external plotter.

    Parameters
    ----------
    samples : array_like
        One-dimensional sample.
    kind : {"ecdf", "histogram", "qq"}
        ``ecdf`` gives ``x,F`` with ``F = i/n`` at the ``i``-th order
        statistic; ``histogram`` gives ``left,right,density``; ``qq`` gives
        ``q_sample,q_reference`` at the levels ``(i - 1/2)/m``.
    reference : array_like, optional
        Second sample for ``qq``; required for that kind.
    bins : int
        Number of histogram bins.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise ValueError("empty sample")
    if not np.isfinite(x).all():
        raise ValueError("sample has non-finite values")
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    if kind == "ecdf":
        w.writerow(("x", "F"))
        n = x.size
        for i, v in enumerate(x, start=1):
            w.writerow((repr(float(v)), repr(i / n)))
    elif kind == "histogram":
        dens, edges = np.histogram(x, bins=bins, density=True)
        w.writerow(("left", "right", "density"))
        for lo, hi, d in zip(edges[:-1], edges[1:], dens):
            w.writerow((repr(float(lo)), repr(float(hi)), repr(float(d))))
    elif kind == "qq":
        if reference is None:
            raise ValueError("qq needs a reference sample")
        y = np.sort(np.asarray(reference, dtype=float).ravel())
        if y.size == 0:
            raise ValueError("empty reference sample")
        m = min(x.size, y.size)
        levels = (np.arange(m) + 0.5) / m
        qx = x if x.size == m else np.quantile(x, levels)
        qy = y if y.size == m else np.quantile(y, levels)
        w.writerow(("q_sample", "q_reference"))
        for a, b in zip(qx, qy):
            w.writerow((repr(float(a)), repr(float(b))))
    else:
        raise ValueError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")
    return out.getvalue()


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", dest="n_samples", type=float, help="number of samples / paths")
    p.add_argument("--depth", type=int, help="N (matrix size) or K (number of levels)")
    p.add_argument("--t", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--a", help="perturbation vector, comma or space separated")
    p.add_argument("--k", type=int, help="level for swap / resample")
    p.add_argument("--dt", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="output path (stdout if omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corners-lab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (
        ("sample", "corners process samples as CSV"),
        ("swap", "apply one level swap to fresh corners samples"),
        ("sweep", "apply the global shift sweep to fresh corners samples"),
        ("rbm", "simulate reflected Brownian motions to time t"),
    ):
        p = sub.add_parser(name, help=helptext)
        _common(p)
        if name == "rbm":
            p.add_argument("--trajectory", help="also write one path as CSV (step,level,index,value)")
            p.add_argument("--every", type=int, default=100, help="trajectory record interval in steps")

    p = sub.add_parser("verify", help="run a named experiment")
    p.add_argument("experiment")
    _common(p)
    p.add_argument("--c", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--dump", help="CSV sample dump prefix")

    p = sub.add_parser("plot-data", help="ecdf / histogram / qq rows")
    p.add_argument("kind", choices=PLOT_KINDS)
    p.add_argument("samples", help="CSV file; the last column is used")
    p.add_argument("--reference", help="second CSV file for qq")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--out")
    return parser


def _settings(args) -> dict:
    """Config file values overlaid with the flags that were given."""
    values = load_config_file(args.config) if getattr(args, "config", None) else {}
    for key in ("seed", "n_samples", "depth", "t", "alpha", "a", "k", "dt", "threads", "out", "c", "d", "dump"):
        v = getattr(args, key, None)
        if v is not None:
            if key == "n_samples":
                if v != int(v):
                    raise ConfigError("n_samples", f"must be an integer, got {v}")
                v = int(v)
            values[key] = parse_value(key, v)
    if values.get("seed") is None:
        values["seed"] = seed_from_env()
    return values


def _write(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _need(values, key, default):
    v = values.get(key)
    return default if v is None else v


def _corners_from(values, default_depth=3):
    n = int(_need(values, "n_samples", 1000))
    depth = int(_need(values, "depth", default_depth))
    t = float(_need(values, "t", 1.0))
    if values.get("a") is not None:
        a = np.asarray(values["a"], dtype=float)
    elif values.get("alpha") is not None:
        a = -values["alpha"] * np.arange(depth, dtype=float)
    else:
        a = np.zeros(depth)
    if n < 1 or depth < 1 or t <= 0:
        raise ConfigError("n/depth/t", "must be positive")
    if a.size < depth:
        raise ConfigError("a", f"needs at least {depth} entries")
    rng = RngStream(values["seed"], 0)
    return sample_corners_process(depth, t, a, rng, size=n), a, rng


def _cmd_sample(values):
    arr, _, _ = _corners_from(values)
    _write(to_csv(arr), values.get("out"))
    return 0


def _cmd_swap(values):
    arr, a, _ = _corners_from(values)
    k = int(_need(values, "k", 1))
    if not 1 <= k < arr.depth:
        raise ConfigError("k", f"must satisfy 1 <= k < depth={arr.depth}")
    out, swapped = level_swap(arr, k, a, RngStream(values["seed"], 1))
    print("parameters after swap:", " ".join(f"{v:g}" for v in swapped), file=sys.stderr)
    _write(to_csv(out), values.get("out"))
    return 0


def _cmd_sweep(values):
    alpha = values.get("alpha")
    if alpha is None or alpha <= 0:
        raise ConfigError("alpha", "the sweep needs a positive --alpha")
    values = dict(values, a=None)
    arr, _, _ = _corners_from(values, default_depth=5)
    res = global_shift_sweep(arr, alpha, RngStream(values["seed"], 1))
    print(f"levels 1..{res.tainted_level - 1} are shifted in law; level {res.tainted_level} is not", file=sys.stderr)
    _write(to_csv(res.array), values.get("out"))
    return 0


def _cmd_rbm(values, args):
    try:
        cfg = RbmConfig(int(_need(values, "depth", 3)), float(_need(values, "alpha", 0.5)),
                        float(_need(values, "t", 1.0)), float(_need(values, "dt", 1e-3)))
    except ValueError as exc:
        raise ConfigError("rbm", str(exc)) from None
    n = int(_need(values, "n_samples", 1000))
    arr = simulate_reflected_system(cfg, RngStream(values["seed"], 0), n)
    _write(to_csv(arr), values.get("out"))
    if args.trajectory:
        traj = simulate_trajectory(cfg, RngStream(values["seed"], 1), every=args.every)
        Path(args.trajectory).write_text(write_trajectory_csv(traj, args.every))
    return 0


def _cmd_verify(values, args):
    cfg = ExperimentConfig(experiment=args.experiment, **values)
    report = run_experiment(cfg)
    if not cfg.out:
        sys.stdout.write(report.to_json())
    for line in report.lines():
        print(line, file=sys.stderr)
    print(f"{report.experiment}: {'PASSED' if report.passed else 'FAILED'} "
          f"in {report.wall_clock_seconds:.2f} s", file=sys.stderr)
    return 0 if report.passed else 1


def _read_column(path):
    text = Path(path).read_text().strip().splitlines()
    rows = list(csv.reader(text))
    values = []
    for row in rows:
        try:
            values.append(float(row[-1]))
        except (ValueError, IndexError):
            continue  # header
    return np.asarray(values)


def _cmd_plot(args):
    x = _read_column(args.samples)
    ref = _read_column(args.reference) if args.reference else None
    _write(emit_plot_data(x, args.kind, ref, bins=args.bins), args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "plot-data":
            return _cmd_plot(args)
        values = _settings(args)
        if args.command == "verify":
            if args.experiment not in EXPERIMENTS:
                raise ConfigError("experiment", f"unknown experiment {args.experiment!r}; choose from {sorted(EXPERIMENTS)}")
            return _cmd_verify(values, args)
        if args.command == "rbm":
            return _cmd_rbm(values, args)
        return {"sample": _cmd_sample, "swap": _cmd_swap, "sweep": _cmd_sweep}[args.command](values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
