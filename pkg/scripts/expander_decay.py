"""Sweep E = 1 expanders and compare fitted decay rates with -(n-1)(na+alpha)."""

import argparse
import csv
import itertools
import sys

from lagmcf.flow import FlowConfig, decay_rate_estimate, integrate_flow
from lagmcf.profile import ExpanderParams, ExpanderProfile


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--f0", type=float, default=2.0)
    ap.add_argument("--t-end", type=float, default=10.0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "a", "alpha", "rate_fit", "rate_series", "rel_err", "f_end"])
    for n, a, alpha in itertools.product((2, 3, 4), (0.5, 1.0, 2.0), (0.0, 1.0)):
        p = ExpanderParams(a=a, E=1.0, alpha=alpha, n=n)
        tr = integrate_flow(ExpanderProfile(p), FlowConfig(f0=args.f0, t_end=args.t_end))
        fit = decay_rate_estimate(tr).rate
        target = -(n - 1) * (n * a + alpha)
        w.writerow([n, a, alpha, repr(fit), repr(target), repr(abs(fit - target) / abs(target)), repr(float(tr.f[-1]))])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
