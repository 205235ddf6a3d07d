"""Gaussian peak on [-1, 1]^11 with Clenshaw-Curtis sparse grids, q = 1..q_max."""
import argparse
import sys

from fskq.experiments import Ex2Config, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qmax", type=int, default=5)
    ap.add_argument("--out", help="optional CSV path")
    args = ap.parse_args()

    report = run_experiment("ex2", Ex2Config(q_max=args.qmax))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_csv())
    print(f"{'q':>2} {'J':>4} {'n':>7} {'estimate':>11} {'rel err':>9} {'wce':>9} {'time s':>7}")
    for r in report.rows:
        t = r.t_kernel_s + r.t_weights_s + r.t_fss_s
        print(f"{r.params['q']:>2} {r.J:>4} {r.n:>7} {r.estimate:11.6f} {r.rel_error:9.2e} {r.wce:9.2e} {t:7.2f}")
    for e in report.errors:
        print("error:", e, file=sys.stderr)
    return 4 if report.has_warnings else 0


if __name__ == "__main__":
    sys.exit(main())
