"""Empirical W1 convergence tables for several dimensions.

Writes one CSV per dimension into --outdir and prints the fitted log-log
slope next to the 1/d reference rate (1/2 for d = 1).
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from advicematch.convergence import MAX_DIM, convergence_benchmark
from advicematch.distributions import GaussianMixture, UniformBox


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--dist", choices=("gaussian", "uniform"), default="uniform")
    ap.add_argument("--min-exp", type=int, default=4)
    ap.add_argument("--max-exp", type=int, default=8)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--outdir", type=Path, default=Path("convergence_out"))
    args = ap.parse_args(argv)
    if any(not 1 <= d <= MAX_DIM for d in args.dims):
        ap.error(f"dimensions must lie in 1..{MAX_DIM}")

    args.outdir.mkdir(parents=True, exist_ok=True)
    sizes = [2 ** k for k in range(args.min_exp, args.max_exp + 1)]
    for d in args.dims:
        if args.dist == "gaussian":
            dist = GaussianMixture(np.zeros((1, d)), np.ones((1, d)), np.ones(1))
        else:
            dist = UniformBox(np.zeros(d), np.ones(d))
        table = convergence_benchmark(dist, sizes, args.trials, args.seed)
        (args.outdir / f"w1_{args.dist}_d{d}.csv").write_text(table.to_csv())
        rate = 0.5 if d == 1 else 1 / d
        print(f"d={d}: slope {table.slope:+.4f} (reference -{rate:.4f}), exact={table.exact}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
