"""JSON documents for node sets, rules and integrand values.

Floats are written with Python's shortest round-trip ``repr`` so reloading
reproduces every value bit for bit, and the content hash of a node set is
stable across runs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import HashMismatchError, ValidationError
from .kernels import GaussianKernel, SymmetricMeasure, kernel_mean
from .symmetry import GeneratorVector
from .weights import FsQuadratureRule, SymmetricNodeSet


def _finite(obj):
    # JSON has no NaN/inf; they are written as null
    if isinstance(obj, float):
        return obj if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_finite(doc), indent=1, allow_nan=False) + "\n"


def write_json(path, doc: dict) -> None:
    Path(path).write_text(dumps(doc))


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def node_set_document(node_set: SymmetricNodeSet, source: dict | None = None) -> dict:
    doc = {"dim": node_set.dim}
    source = dict(source or {})
    if "basis" in source:
        doc["basis"] = source.pop("basis")
    if source:
        doc["source"] = source
    doc["generators"] = [list(g.values) for g in node_set.generators]
    doc["sizes"] = node_set.sizes
    doc["total_nodes"] = node_set.total_nodes
    doc["hash"] = node_set.content_hash()
    return doc


def node_set_from_document(doc: dict, verify: bool = True) -> SymmetricNodeSet:
    try:
        dim = int(doc["dim"])
        gens = [GeneratorVector(tuple(float(v) for v in g)) for g in doc["generators"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed node-set document: {exc}") from exc
    node_set = SymmetricNodeSet.from_generators(gens, dim)
    if verify and "hash" in doc and doc["hash"] != node_set.content_hash():
        raise HashMismatchError("node-set hash does not match its generators")
    return node_set


def load_node_set(path) -> tuple[SymmetricNodeSet, dict]:
    doc = read_json(path)
    return node_set_from_document(doc), doc


def rule_document(rule: FsQuadratureRule, source: dict | None = None) -> dict:
    doc = node_set_document(rule.node_set, source)
    node_hash = doc.pop("hash")
    doc["kernel"] = rule.kernel.to_dict()
    doc["measure"] = rule.measure.to_dict()
    doc["weights"] = [float(w) for w in rule.weights]
    doc["wce"] = rule.wce
    doc["cond_estimate"] = rule.cond_estimate
    doc.update(rule.meta)
    doc["hash"] = node_hash
    return doc


def rule_from_document(doc: dict) -> FsQuadratureRule:
    node_set = node_set_from_document(doc)
    kernel = GaussianKernel.from_dict(doc["kernel"])
    measure = SymmetricMeasure.from_dict(doc["measure"])
    weights = np.array([float(w) for w in doc["weights"]])
    if weights.size != node_set.J:
        raise ValidationError(f"{weights.size} weights for {node_set.J} sets")
    gens = np.array([g.values for g in node_set.generators]).reshape(node_set.J, node_set.dim)
    means = np.asarray(kernel_mean(kernel, measure, gens), dtype=float) if node_set.J else np.zeros(0)
    meta = {k: doc[k] for k in ("oracle_max_rel_deviation",) if k in doc}
    return FsQuadratureRule(
        node_set, weights, kernel, measure, means,
        wce=float(doc["wce"]), cond_estimate=float(doc.get("cond_estimate") if doc.get("cond_estimate") is not None else "nan"), meta=meta,
    )


def load_rule(path) -> FsQuadratureRule:
    return rule_from_document(read_json(path))


def values_document(node_hash: str, values) -> dict:
    return {"hash": node_hash, "values": [float(v) for v in np.asarray(values, dtype=float).reshape(-1)]}


def load_values(path, expected_hash: str) -> np.ndarray:
    doc = read_json(path)
    if doc.get("hash") != expected_hash:
        raise HashMismatchError(
            f"values file hash {str(doc.get('hash'))[:12]}... does not match node set {expected_hash[:12]}..."
        )
    return np.array([float(v) for v in doc["values"]])


def write_points_csv(path, node_set: SymmetricNodeSet) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["set"] + [f"x{i + 1}" for i in range(node_set.dim)])
        for j, s in enumerate(node_set.sets):
            for p in s.points:
                w.writerow([j] + [repr(float(v)) for v in p])


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment. Keys use CLI spelling."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out
