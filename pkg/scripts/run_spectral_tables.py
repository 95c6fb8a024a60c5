"""Eigenvalue error of the Bessel problems with polynomial vs rational coefficients."""

import argparse
from pathlib import Path

from polefree.cli import atomic_write, parse_range
from polefree.spectral import run_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--coefs", type=parse_range, default=parse_range("4..10"))
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--outdir", default="results")
    args = p.parse_args()
    Path(args.outdir).mkdir(parents=True, exist_ok=True)
    for case in ("single", "multiple"):
        rows = run_table(case, args.coefs, n_points=args.points)
        lines = ["num_coefs,mode,eig_error,approx_error"]
        lines += [f"{r.num_coefs},{r.mode},{r.eig_error:.17g},{r.approx_error:.17g}" for r in rows]
        atomic_write(Path(args.outdir) / f"spectral_{case}.csv", "\n".join(lines) + "\n")
        print(f"-- {case} coefficient case")
        print(f"{'n':>3} {'mode':<11} {'eig error':>12} {'approx error':>13}")
        for r in rows:
            print(f"{r.num_coefs:>3} {r.mode:<11} {r.eig_error:>12.4e} {r.approx_error:>13.4e}")


if __name__ == "__main__":
    main()
