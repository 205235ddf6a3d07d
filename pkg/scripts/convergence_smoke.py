"""WCE against n for nested Clenshaw-Curtis grids in low dimension.

Prints one line per level; the log-log slope is a rough rate estimate.
"""
import argparse
import math
import warnings

from fskq import GaussianKernel, SymmetricMeasure, SymmetricNodeSet, make_rule
from fskq.nodes import make_basis, sparse_grid_generators


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=1)
    ap.add_argument("--qmax", type=int, default=7)
    ap.add_argument("--length-scale", type=float, default=0.5)
    ap.add_argument("--measure", default="uniform_cube", choices=["uniform_cube", "std_gaussian"])
    args = ap.parse_args()

    k = GaussianKernel(args.length_scale)
    mu = SymmetricMeasure(args.measure, args.dim)
    prev = None
    for q in range(1, args.qmax + 1):
        node_set = SymmetricNodeSet.from_generators(sparse_grid_generators(q, args.dim, make_basis("cc", q)))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            rule = make_rule(node_set, k, mu)
        slope = ""
        if prev and prev[1] > 0 and rule.wce > 0:
            slope = f"{math.log(rule.wce / prev[1]) / math.log(rule.n / prev[0]):6.1f}"
        flag = " (warning)" if caught else ""
        print(f"q={q} n={rule.n:5d} wce={rule.wce:.3e} {slope}{flag}")
        prev = (rule.n, rule.wce)


if __name__ == "__main__":
    main()
