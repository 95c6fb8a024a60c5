"""Convergence sweep of polynomial, AAA and Bernstein-denominator fits on F1-F3.

    python scripts/run_aaa_comparison.py --noise gaussian --n 2..14 --seeds 1..5
"""

import argparse
from pathlib import Path

import numpy as np

from polefree.bench import run_convergence_study
from polefree.cli import atomic_write, parse_range


def summarise(report):
    groups = {}
    for r in report.rows:
        groups.setdefault((r.function, r.method, r.n), []).append(r)
    for (f, m, n), rows in sorted(groups.items()):
        poles = sum(r.has_pole for r in rows)
        print(f"{f} {m:<10} n={n:<3} mean rmse={np.nanmean([r.rmse for r in rows]):.3e} fits with poles={poles}/{len(rows)}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--noise", choices=("none", "gaussian"), default="gaussian")
    p.add_argument("--n", type=parse_range, default=parse_range("2..14"))
    p.add_argument("--seeds", type=parse_range, default=parse_range("1..5"))
    p.add_argument("--out", default="results/aaa_comparison.csv")
    args = p.parse_args()
    report = run_convergence_study("aaa_comparison", args.n, args.seeds, noise=args.noise)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    atomic_write(args.out, report.to_csv())
    summarise(report)


if __name__ == "__main__":
    main()
