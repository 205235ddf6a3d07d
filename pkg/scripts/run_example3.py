"""Vasicek zero-coupon bond: Gauss-Hermite sparse grid (q=2) against plain Monte Carlo."""
import argparse
import sys

import numpy as np

from fskq.cli import int_range
from fskq.experiments import Ex3Config, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", type=int_range, default=(10, 20, 30, 40, 50), help="time steps, e.g. 10:50:10")
    ap.add_argument("--seeds", type=int_range, default=tuple(range(10)))
    ap.add_argument("--out")
    args = ap.parse_args()

    report = run_experiment("ex3", Ex3Config(dims=args.dims, mc_seeds=args.seeds))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_csv())
    print(f"{'steps':>5} {'n':>6} {'closed form':>12} {'quad rel':>9} {'MC median':>9}")
    for r in report.rows:
        mc = [b.rel_error for b in report.baselines if b.params["steps"] == r.params["steps"]]
        med = float(np.median(mc)) if mc else float("nan")
        print(f"{r.params['steps']:>5} {r.n:>6} {r.truth:12.6f} {r.rel_error:9.2e} {med:9.2e}")
    return 4 if report.has_warnings else 0


if __name__ == "__main__":
    sys.exit(main())
