"""Command-line front end.

Subcommands: ``nodes``, ``rule``, ``integrate`` and ``experiment``. Every
subcommand accepts ``--config FILE`` (flat ``key = value`` lines); flags on the
command line take precedence. Failures print one ``error: <code>: <message>``
line to stderr and exit with 1 (validation), 2 (numerical), or 3 (I/O);
successful runs that produced numerical warnings exit with 4.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import io
from .errors import (
    EXIT_IO,
    EXIT_OK,
    EXIT_WARNINGS,
    FskqError,
    NumericalWarning,
    ValidationError,
)
from .kernels import GaussianKernel, SymmetricMeasure
from .nodes import make_basis, random_generators, sparse_grid_generators
from .symmetry import canonicalize_generator
from .weights import SymmetricNodeSet, integrate, integrate_values, make_rule, naive_weights


def int_range(text: str) -> tuple[int, ...]:
    """``"10:50:10"`` (inclusive stop), ``"0:9"`` or ``"5,10,20"``."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise ValueError
            return tuple(range(start, stop + 1, step))
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None


def parse_generators(text: str, tol: float) -> list:
    """``"0,0;1,0"``: generators separated by ';', entries by ','."""
    gens = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            gens.append(canonicalize_generator([float(v) for v in chunk.split(",")], tol))
    return gens


def _add_node_source(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("node selection")
    g.add_argument("--basis", choices=["cc", "gh"], help="sparse grid basis")
    g.add_argument("--q", type=int, help="sparse grid level (>= 1)")
    g.add_argument("--dim", type=int, help="dimension")
    g.add_argument("--random", action="store_true", help="random generators (FSKMC)")
    g.add_argument("--J", type=int, help="number of random generators")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--truncate-below", type=float, default=None,
                   help="heuristic: zero generator entries below this value")
    g.add_argument("--generators", help="explicit generators, e.g. '0,0;1,0'")
    g.add_argument("--tol", type=float, default=1e-12, help="canonicalization tolerance")
    g.add_argument("--cap", type=int, default=2**25, help="maximum number of nodes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fskq", description="Fully symmetric kernel quadrature.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nodes", help="generate a node set of fully symmetric sets")
    _add_node_source(p)
    p.add_argument("--measure", choices=["std_gaussian", "uniform_cube"], default="std_gaussian",
                   help="sampling distribution for --random")
    p.add_argument("--out", default="nodes.json")
    p.add_argument("--expand", metavar="CSV", help="also write every node to this CSV file")
    p.add_argument("--config")

    p = sub.add_parser("rule", help="compute quadrature weights for a node set")
    p.add_argument("--nodes", help="node-set JSON file")
    _add_node_source(p)
    p.add_argument("--length-scale", type=float, required=False)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--measure", choices=["std_gaussian", "uniform_cube"], default="std_gaussian")
    p.add_argument("--drop-center", action="store_true", help="remove the origin set before solving")
    p.add_argument("--oracle", action="store_true", help="cross-check against the full n x n solve")
    p.add_argument("--oracle-cap", type=int, default=10_000)
    p.add_argument("--out", default="rule.json")
    p.add_argument("--config")

    p = sub.add_parser("integrate", help="apply a rule to a built-in integrand or a values file")
    p.add_argument("--rule", required=False)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--values", help="values JSON file keyed by the node-set hash")
    src.add_argument("--integrand", choices=["ex1", "ex2", "bond"])
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--config")

    p = sub.add_parser("experiment", help="run one of the built-in experiments")
    p.add_argument("experiment", choices=["ex1", "ex2", "ex3"])
    p.add_argument("--qmax", type=int, help="ex2: highest sparse grid level")
    p.add_argument("--qmin", type=int, help="ex2: lowest sparse grid level")
    p.add_argument("--q", type=int, help="ex3: sparse grid level")
    p.add_argument("--J", type=int_range, help="ex1: numbers of sets, e.g. 10:50:10")
    p.add_argument("--seeds", type=int_range, help="ex1 seeds / ex3 Monte Carlo seeds, e.g. 0:9")
    p.add_argument("--dims", type=int_range, help="ex3: Euler step counts, e.g. 10:50:10")
    p.add_argument("--length-scale", type=float)
    p.add_argument("--no-drop-center", action="store_true")
    p.add_argument("--fit-on", choices=["mc", "fss"])
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--baseline-out", help="ex1/ex3: write the baseline rows to this CSV file")
    p.add_argument("--allow-large", action="store_true", help="ex2: permit levels above 5")
    p.add_argument("--config")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = io.read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, raw in cfg.items():
            if key not in known or key in ("config", "help"):
                raise ValidationError(f"unknown config key {key!r} for {args.command}")
            action = known[key]
            if action.type is not None:
                value = action.type(raw)
            elif action.const is True or action.nargs == 0:
                value = raw.lower() in ("1", "true", "yes", "on")
            else:
                value = raw
            defaults[key] = value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------- node sets


def _validate_positive(args, *names):
    for name in names:
        value = getattr(args, name, None)
        if value is not None and not value > 0:
            raise ValidationError(f"--{name.replace('_', '-')} must be positive, got {value}")


def node_set_from_args(args) -> tuple[SymmetricNodeSet, dict]:
    _validate_positive(args, "dim", "J", "cap", "tol")
    if args.q is not None and args.q < 1:
        raise ValidationError(f"--q must be >= 1, got {args.q}")
    if args.generators:
        gens = parse_generators(args.generators, args.tol)
        dim = gens[0].dim if gens else args.dim
        if args.dim is not None and dim != args.dim:
            raise ValidationError(f"generators have dimension {dim}, --dim is {args.dim}")
        return SymmetricNodeSet.from_generators(gens, dim, cap=args.cap), {"source": "explicit"}
    if args.random:
        if args.J is None or args.dim is None:
            raise ValidationError("--random needs --J and --dim")
        gens = random_generators(args.J, args.dim, args.measure, args.seed, args.truncate_below)
        source = {"source": "random", "measure": args.measure, "J": args.J, "seed": args.seed}
        if args.truncate_below is not None:
            source["truncate_below"] = args.truncate_below
        return SymmetricNodeSet.from_generators(gens, args.dim, cap=args.cap), source
    if args.basis:
        if args.q is None or args.dim is None:
            raise ValidationError("--basis needs --q and --dim")
        basis = make_basis(args.basis, args.q)
        gens = sparse_grid_generators(args.q, args.dim, basis, cap=args.cap)
        return (
            SymmetricNodeSet.from_generators(gens, args.dim, cap=args.cap),
            {"basis": {"kind": basis.kind, "q": args.q}},
        )
    raise ValidationError("choose a node source: --basis, --random or --generators")


def cmd_nodes(args, out) -> int:
    node_set, source = node_set_from_args(args)
    doc = io.node_set_document(node_set, source)
    io.write_json(args.out, doc)
    if args.expand:
        io.write_points_csv(args.expand, node_set)
    print(f"J={node_set.J} n={node_set.total_nodes}", file=out)
    print("sizes=" + ",".join(str(s) for s in node_set.sizes), file=out)
    return EXIT_OK


def cmd_rule(args, out) -> int:
    _validate_positive(args, "length_scale", "scale", "oracle_cap")
    if args.length_scale is None:
        raise ValidationError("--length-scale is required")
    if args.nodes:
        node_set, doc = io.load_node_set(args.nodes)
        source = {k: doc[k] for k in ("basis", "source") if k in doc}
        if isinstance(source.get("source"), dict):
            source.update(source.pop("source"))
    else:
        node_set, source = node_set_from_args(args)
    kernel = GaussianKernel(args.length_scale, args.scale)
    measure = SymmetricMeasure(args.measure, node_set.dim)
    rule = make_rule(node_set, kernel, measure, drop_center=args.drop_center)
    if args.oracle:
        w_naive = naive_weights(rule.node_set.points, kernel, measure, cap=args.oracle_cap)
        dev = float(np.max(np.abs(rule.node_weights() - w_naive)) / np.max(np.abs(w_naive)))
        rule.meta["oracle_max_rel_deviation"] = dev
        print(f"oracle max relative deviation={dev:.3e}", file=out)
    io.write_json(args.out, io.rule_document(rule, source))
    print(f"J={rule.J} n={rule.n} wce={rule.wce!r} cond={rule.cond_estimate:.3e}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------- integration


def _builtin_integrand(name: str, dim: int):
    if name == "ex1":
        return ex.integrand_ex1, float("nan")
    if name == "ex2":
        return ex.integrand_ex2, ex.true_integral_ex2()
    p = ex.VasicekParams(steps=dim + 1)
    return (lambda x: ex.bond_integrand(p, x)), ex.bond_closed_form(p)


def cmd_integrate(args, out) -> int:
    if not args.rule:
        raise ValidationError("--rule is required")
    if not (args.values or args.integrand):
        raise ValidationError("give --values or --integrand")
    rule = io.load_rule(args.rule)
    node_hash = rule.node_set.content_hash()
    truth = float("nan")
    if args.values:
        values = io.load_values(args.values, node_hash)
        estimate = integrate_values(rule, values)
    else:
        f, truth = _builtin_integrand(args.integrand, rule.node_set.dim)
        estimate = integrate(rule, f)
    rel = abs(estimate - truth) / abs(truth) if truth == truth and truth else float("nan")
    report = ex.ExperimentReport("integrate", config={"rule": str(args.rule), "hash": node_hash})
    report.rows.append(ex.ReportRow(rule.n, rule.J, estimate, truth, rel, rule.wce,
                                    method=args.integrand or "values"))
    _emit(report.to_csv() if args.format == "csv" else io.dumps(report.to_dict()), args.out, out)
    return EXIT_OK


def cmd_experiment(args, out) -> int:
    name = args.experiment
    if name == "ex1":
        cfg = ex.Ex1Config()
        if args.J is not None:
            cfg.J_values = args.J
        if args.seeds is not None:
            cfg.seeds = args.seeds
        if args.fit_on:
            cfg.fit_on = args.fit_on
    elif name == "ex2":
        cfg = ex.Ex2Config()
        if args.qmax is not None:
            cfg.q_max = args.qmax
        if args.qmin is not None:
            cfg.q_min = args.qmin
        if cfg.q_min < 1 or cfg.q_max < cfg.q_min:
            raise ValidationError(f"need 1 <= qmin <= qmax, got {cfg.q_min}..{cfg.q_max}")
        if cfg.q_max > 5 and not args.allow_large:
            raise ValidationError("levels above 5 take minutes to hours; pass --allow-large")
        if args.length_scale is not None:
            _validate_positive(args, "length_scale")
            cfg.length_scale = args.length_scale
    else:
        cfg = ex.Ex3Config()
        if args.dims is not None:
            if any(d < 2 for d in args.dims):
                raise ValidationError("--dims entries must be >= 2")
            cfg.dims = args.dims
        if args.q is not None:
            if args.q < 1:
                raise ValidationError(f"--q must be >= 1, got {args.q}")
            cfg.q = args.q
        if args.seeds is not None:
            cfg.mc_seeds = args.seeds
        if args.length_scale is not None:
            _validate_positive(args, "length_scale")
            cfg.length_scale = args.length_scale
        if args.no_drop_center:
            cfg.drop_center = False
    report = ex.run_experiment(name, cfg)
    _emit(report.to_csv() if args.format == "csv" else io.dumps(report.to_dict()), args.out, out)
    if args.baseline_out:
        Path(args.baseline_out).write_text(report.to_csv(baselines=True))
    for err in report.errors:
        print(f"warning: {err['code']}: {err['message']}", file=sys.stderr)
    return EXIT_WARNINGS if report.has_warnings else EXIT_OK


def _emit(text: str, path, out) -> None:
    if path:
        Path(path).write_text(text)
    else:
        out.write(text)


COMMANDS = {"nodes": cmd_nodes, "rule": cmd_rule, "integrate": cmd_integrate, "experiment": cmd_experiment}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = parse_args(argv)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NumericalWarning)
            status = COMMANDS[args.command](args, out)
        numeric = [w for w in caught if issubclass(w.category, NumericalWarning)]
        for w in numeric:
            print(f"warning: {w.category.__name__}: {w.message}", file=sys.stderr)
        if numeric and status == EXIT_OK:
            status = EXIT_WARNINGS
        return status
    except FskqError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return exc.exit_code
    except argparse.ArgumentTypeError as exc:
        print(f"error: invalid-config: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        code = "file-not-found" if isinstance(exc, FileNotFoundError) else "io-error"
        print(f"error: {code}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
