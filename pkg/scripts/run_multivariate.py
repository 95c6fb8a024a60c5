"""Bivariate study: noiseless grid convergence plus noisy replicate pole audits.

Replicates default to 20; pass --replicates 200 for the full count.
"""

import argparse
from pathlib import Path

from polefree.bench import run_convergence_study
from polefree.cli import atomic_write, parse_range


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=parse_range, default=parse_range("2..8"))
    p.add_argument("--noisy-n", type=int, default=4)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--outdir", default="results")
    args = p.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    clean = run_convergence_study("multivariate", args.n, [0], noise="none")
    atomic_write(out / "multivariate_noiseless.csv", clean.to_csv())
    for r in clean.rows:
        print(f"{r.function} n={r.n} rmse={r.rmse:.3e}")

    noisy = run_convergence_study("multivariate", [args.noisy_n], range(1, args.replicates + 1), noise="gaussian")
    atomic_write(out / "multivariate_noisy.csv", noisy.to_csv())
    dirty = sum(r.has_pole or bool(r.error) for r in noisy.rows)
    print(f"noisy replicates: {len(noisy.rows)} fits, {dirty} with poles or errors")


if __name__ == "__main__":
    main()
