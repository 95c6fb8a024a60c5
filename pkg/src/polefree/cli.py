"""Command-line entry point: ``polefree fit | benchmark | spectral``."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import SUITES, rmse, run_convergence_study
from .errors import DomainError
from .fitting import Dataset, FitConfig, cross_validate, fit, with_smoothing
from .multivariate import mv_evaluate, mv_fit
from .spectral import run_table

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


def atomic_write(path, text):
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def parse_range(text):
    """Inclusive ``a..b`` (or a single integer) as a list of ints."""
    try:
        if ".." in text:
            lo, hi = (int(v) for v in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def parse_smoothing(text):
    """A float, or ``cv:a,b,c`` for a cross-validated grid."""
    try:
        if text.startswith("cv:"):
            grid = [float(v) for v in text[3:].split(",") if v.strip()]
            if not grid:
                raise ValueError
            return grid
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad smoothing value {text!r}") from None


def read_xy(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DomainError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if header not in (["x", "y"], ["x", "z", "y"]):
        raise DomainError(f"{path}: header must be x,y or x,z,y, got {','.join(header)}")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(header):
        raise DomainError(f"{path}: no data rows or ragged rows")
    points = data[:, 0] if len(header) == 2 else data[:, :2]
    return Dataset(points, data[:, -1])


def cmd_fit(args):
    data = read_xy(args.input)
    fitter = fit if data.ndim == 1 else mv_fit
    cfg = FitConfig(
        num_degree=args.num_degree,
        den_degree=args.den_degree,
        loss=args.loss,
        max_iters=args.max_iters,
        hot_start=not args.no_hot_start,
        seed=args.seed,
    )
    if isinstance(args.smoothing, list):
        cfg, _ = cross_validate(data, with_smoothing(cfg, args.smoothing), k=args.folds, seed=args.seed, fitter=fitter)
    else:
        cfg = replace(cfg, smoothing=args.smoothing)
    rep = fitter(data, cfg)
    pred = rep.model(data.points) if data.ndim == 1 else mv_evaluate(rep.model, data.points)
    report = {
        "rmse": rmse(pred, data.values),
        "loss": float(rep.final_loss),
        "iterations": int(rep.iterations),
        "converged": bool(rep.converged),
        "smoothing": float(cfg.smoothing),
        "hot_start_source": rep.hot_start_source,
        "pole_audit": rep.pole_audit.to_dict(),
    }
    atomic_write(args.output, json.dumps(rep.model.to_dict(), indent=2) + "\n")
    report_path = args.report or str(Path(args.output).with_suffix("")) + ".report.json"
    atomic_write(report_path, json.dumps(report, indent=2) + "\n")
    if not rep.converged:
        print(f"warning: fit did not converge in {cfg.max_iters} iterations", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_benchmark(args):
    report = run_convergence_study(
        args.suite, args.n, args.seeds, noise=args.noise, functions=args.functions or None
    )
    atomic_write(args.output, report.to_csv())
    return EXIT_OK


def cmd_spectral(args):
    rows = run_table(args.case, args.coefs, n_points=args.points)
    lines = ["num_coefs,mode,eig_error,approx_error"]
    lines += [f"{r.num_coefs},{r.mode},{r.eig_error:.17g},{r.approx_error:.17g}" for r in rows]
    atomic_write(args.output, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="polefree", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a pole-free rational model to x,y or x,z,y CSV data")
    f.add_argument("--input", required=True)
    f.add_argument("--output", required=True, help="model JSON path")
    f.add_argument("--report", help="report JSON path (default: <output>.report.json)")
    f.add_argument("--num-degree", type=int, default=10)
    f.add_argument("--den-degree", type=int, default=10)
    f.add_argument("--loss", choices=("linearized", "reweighted", "nonlinear"), default="nonlinear")
    f.add_argument("--smoothing", type=parse_smoothing, default=0.0)
    f.add_argument("--folds", type=int, default=5)
    f.add_argument("--max-iters", type=int, default=500)
    f.add_argument("--no-hot-start", action="store_true")
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=cmd_fit)

    b = sub.add_parser("benchmark", help="run a convergence study and write CSV")
    b.add_argument("--suite", required=True)
    b.add_argument("--n", type=parse_range, required=True)
    b.add_argument("--seeds", type=parse_range, default=parse_range("1..5"))
    b.add_argument("--noise", choices=("none", "gaussian"), default=None)
    b.add_argument("--functions", nargs="*")
    b.add_argument("--output", required=True)
    b.set_defaults(func=cmd_benchmark)

    s = sub.add_parser("spectral", help="Bessel eigenvalue tables (polynomial vs rational coefficients)")
    s.add_argument("--case", choices=("single", "multiple"), required=True)
    s.add_argument("--coefs", type=parse_range, default=parse_range("4..10"))
    s.add_argument("--points", type=int, default=256)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_spectral)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad flags; fold that into the validation code
        return EXIT_ERROR if exc.code else EXIT_OK
    if getattr(args, "suite", None) is not None and args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_ERROR
    if getattr(args, "coefs", None) is not None and min(args.coefs) < 1:
        print("error: coefficient counts must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
