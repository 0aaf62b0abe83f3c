"""Oracle discrepancy against the closed form as a function of the FD step.

Prints one row per (parameter set, fd_step) with the worst relative
discrepancy over the s grid. The error should fall roughly like h^2 until
rounding takes over near h = 1e-6.
"""

import argparse
import csv
import sys

import numpy as np

from lagmcf.curvature import mean_curvature_in_L
from lagmcf.oracle import EmbeddingChart, oracle_mean_curvature_in_L, random_sphere_point
from lagmcf.profile import ExpanderParams, ExpanderProfile

SETS = [(2, 1.0, 0.0, 1.0), (3, 1.0, 1.0, 1.0), (2, 1.0, 0.0, 2.0), (3, 2.0, 0.5, 1.5)]
STEPS = (1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "a", "alpha", "E", "fd_step", "max_rel_discrepancy"])
    grid = np.linspace(0.1, 3.0, 30)
    for n, a, alpha, E in SETS:
        prof = ExpanderProfile(ExpanderParams(a=a, E=E, alpha=alpha, n=n))
        rng = np.random.default_rng(args.seed)
        xs = [random_sphere_point(rng, n) for _ in grid]
        refs = [mean_curvature_in_L(prof, s, x).H for s, x in zip(grid, xs)]
        for h in STEPS:
            worst = max(
                np.linalg.norm(oracle_mean_curvature_in_L(EmbeddingChart(prof, x, h), s) - ref) / np.linalg.norm(ref)
                for s, x, ref in zip(grid, xs, refs)
            )
            w.writerow([n, a, alpha, E, repr(h), repr(float(worst))])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
