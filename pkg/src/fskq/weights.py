"""Kernel quadrature weights for unions of fully symmetric sets.

When kernel, domain and measure are invariant under signed permutations, all
nodes of one fully symmetric set share a weight, and the ``J`` distinct
weights solve ``S w = k_mu(generators)`` where ``S[i, j]`` is the sum of the
kernel between one point of set ``i`` and every point of set ``j``. Building
``S`` costs ``J * n`` kernel evaluations instead of the ``n^2`` of the full
kernel matrix.
"""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.linalg.lapack

from .errors import (
    CapExceededError,
    DuplicateGeneratorError,
    EmptyNodeSetError,
    IllConditionedWarning,
    InstabilityWarning,
    InvalidDimensionError,
    NonFiniteEvaluationError,
    ResidualWarning,
    SingularSystemError,
    UnsupportedPairError,
)
from .kernels import GaussianKernel, SymmetricMeasure, initial_error_sq, kernel_mean
from .symmetry import (
    DEFAULT_SET_CAP,
    DEFAULT_TOL,
    FullySymmetricSet,
    GeneratorVector,
    cardinality,
    evaluate_checked,
    expand,
)

# Ill-conditioned S (cond ~1e18 on 11-D Clenshaw-Curtis grids) still gives accurate
# rules, so only exactly vanishing pivots are treated as singular by default.
PIVOT_RTOL = 0.0
RESIDUAL_TOL = 1e-8
WCE_CLAMP = -1e-10
NAIVE_CAP = 10_000
NAIVE_COND_WARN = 1e14
ROW_CHUNK = 2**14


class SymmetricNodeSet:
    """Ordered union of ``J`` fully symmetric sets with distinct generators.

    Points of one set are contiguous and sets keep their input order.
    """

    def __init__(self, sets: Sequence[FullySymmetricSet], dim: int | None = None, *, check: bool = True):
        sets = list(sets)
        if dim is None:
            if not sets:
                raise InvalidDimensionError("dim is required for an empty node set")
            dim = sets[0].dim
        for s in sets:
            if s.dim != dim:
                raise InvalidDimensionError(f"set of dimension {s.dim} in a {dim}-dimensional node set")
        if check:
            _reject_duplicates([s.generator for s in sets])
        self.dim = int(dim)
        self.sets = tuple(sets)
        self._points = None

    @classmethod
    def from_generators(
        cls, generators: Sequence[GeneratorVector], dim: int | None = None, cap: int = DEFAULT_SET_CAP
    ) -> "SymmetricNodeSet":
        generators = list(generators)
        if dim is None and generators:
            dim = generators[0].dim
        _reject_duplicates(generators)
        total = sum(cardinality(g) for g in generators)
        if total > cap:
            raise CapExceededError(f"node set would have {total} points, cap is {cap}")
        return cls([expand(g) for g in generators], dim, check=False)

    @property
    def generators(self) -> list[GeneratorVector]:
        return [s.generator for s in self.sets]

    @property
    def sizes(self) -> list[int]:
        return [s.size for s in self.sets]

    @property
    def J(self) -> int:
        return len(self.sets)

    @property
    def total_nodes(self) -> int:
        return sum(self.sizes)

    @property
    def points(self) -> np.ndarray:
        if self._points is None:
            if self.sets:
                pts = np.vstack([s.points for s in self.sets])
            else:
                pts = np.zeros((0, self.dim))
            pts.setflags(write=False)
            self._points = pts
        return self._points

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)]).astype(int)

    def without_origin(self) -> "SymmetricNodeSet":
        return SymmetricNodeSet([s for s in self.sets if not s.generator.is_origin()], self.dim, check=False)

    def content_hash(self) -> str:
        payload = json.dumps(
            {"dim": self.dim, "generators": [list(g.values) for g in self.generators]},
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def __len__(self) -> int:
        return self.J

    def __repr__(self) -> str:
        return f"SymmetricNodeSet(dim={self.dim}, J={self.J}, n={self.total_nodes})"


def _reject_duplicates(generators: Sequence[GeneratorVector], tol: float = DEFAULT_TOL):
    if len(generators) < 2:
        return
    arr = np.array([g.values for g in generators])
    for start in range(0, len(arr), 256):
        block = arr[start:start + 256]
        diff = np.max(np.abs(block[:, None, :] - arr[None, :, :]), axis=2)
        rows = np.arange(block.shape[0])
        diff[rows, start + rows] = np.inf
        if np.any(diff <= tol):
            i, j = np.argwhere(diff <= tol)[0]
            raise DuplicateGeneratorError(
                f"generators {start + i} and {j} coincide: {[float(v) for v in arr[j]]}"
            )


@dataclass(frozen=True, eq=False)
class SMatrix:
    values: np.ndarray
    set_sizes: tuple[int, ...]
    kernel_evaluations: int

    @property
    def J(self) -> int:
        return self.values.shape[0]

    def symmetrized(self) -> np.ndarray:
        """``diag(n) S``, symmetric in exact arithmetic."""
        return np.asarray(self.set_sizes, dtype=float)[:, None] * self.values


def build_s_matrix(node_set: SymmetricNodeSet, k: GaussianKernel) -> SMatrix:
    """Block row sums of the kernel matrix, using each set's first point."""
    if node_set.J == 0:
        raise EmptyNodeSetError("node set is empty")
    pts = node_set.points
    offsets = node_set.offsets
    J = node_set.J
    S = np.empty((J, J))
    row = np.empty(pts.shape[0])
    for i, s in enumerate(node_set.sets):
        rep = s.points[0][None, :]
        for start in range(0, pts.shape[0], ROW_CHUNK):
            row[start:start + ROW_CHUNK] = k(rep, pts[start:start + ROW_CHUNK])
        if not np.all(np.isfinite(row)):
            bad = int(np.argmax(~np.isfinite(row)))
            raise NonFiniteEvaluationError(f"non-finite kernel value at node {pts[bad].tolist()}", pts[bad])
        for j in range(J):
            S[i, j] = np.sum(row[offsets[j]:offsets[j + 1]])
    S.setflags(write=False)
    return SMatrix(S, tuple(node_set.sizes), J * node_set.total_nodes)


def solve_weights(S: SMatrix | np.ndarray, means, pivot_rtol: float = PIVOT_RTOL) -> np.ndarray:
    """Solve ``S w = means`` by LU with partial pivoting.

    A pivot with ``|p| <= pivot_rtol * max|S|`` raises
    :class:`SingularSystemError` (with the default only exact zeros, which is
    what duplicated sets produce). A relative residual above 1e-8 emits
    :class:`ResidualWarning`.
    """
    A = np.asarray(S.values if isinstance(S, SMatrix) else S, dtype=float)
    b = np.asarray(means, dtype=float).reshape(-1)
    if A.shape != (b.size, b.size):
        raise InvalidDimensionError(f"S has shape {A.shape} but {b.size} right-hand sides")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise NonFiniteEvaluationError("non-finite entries in the weight system")
    scale = np.max(np.abs(A))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    small = pivots <= pivot_rtol * scale
    if small.any():
        idx = int(np.argmax(small))
        raise SingularSystemError(
            f"weight system is numerically singular at pivot {idx} "
            f"(|pivot| = {pivots[idx]:.3e}, max|S| = {scale:.3e}); "
            "look for near-duplicate sets or an overly large length-scale",
            pivot_index=idx,
        )
    w = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    bnorm = np.max(np.abs(b))
    resid = np.max(np.abs(A @ w - b)) / bnorm if bnorm > 0 else np.max(np.abs(A @ w))
    if resid > RESIDUAL_TOL:
        warnings.warn(f"weight system residual {resid:.3e} exceeds {RESIDUAL_TOL}", ResidualWarning, stacklevel=2)
    return w


def naive_weights(nodes, k: GaussianKernel, mu: SymmetricMeasure, cap: int = NAIVE_CAP) -> np.ndarray:
    """Per-node weights from the full ``n x n`` kernel system. O(n^3); oracle use only."""
    X = np.atleast_2d(np.asarray(nodes, dtype=float))
    n = X.shape[0]
    if n > cap:
        raise CapExceededError(f"{n} nodes exceed the naive solver cap of {cap}")
    K = k.matrix(X)
    z = kernel_mean(k, mu, X)
    try:
        c, lower = scipy.linalg.cho_factor(K, check_finite=False)
        rcond, _ = scipy.linalg.lapack.dpocon(c, np.linalg.norm(K, 1))
        cond = 1.0 / rcond if rcond > 0 else np.inf
        w = scipy.linalg.cho_solve((c, lower), z, check_finite=False)
    except np.linalg.LinAlgError:
        cond = np.inf
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            w = scipy.linalg.solve(K, z, check_finite=False)
    if not cond < NAIVE_COND_WARN:
        warnings.warn(f"kernel matrix condition estimate {cond:.3e}", IllConditionedWarning, stacklevel=2)
    return w


def naive_wce(nodes, k: GaussianKernel, mu: SymmetricMeasure, cap: int = NAIVE_CAP) -> float:
    """Worst-case error from the full kernel matrix, without clamping."""
    X = np.atleast_2d(np.asarray(nodes, dtype=float))
    w = naive_weights(X, k, mu, cap)
    e2 = initial_error_sq(k, mu) - float(kernel_mean(k, mu, X) @ w)
    return float(np.sqrt(max(e2, 0.0)))


@dataclass(frozen=True, eq=False)
class FsQuadratureRule:
    node_set: SymmetricNodeSet
    weights: np.ndarray
    kernel: GaussianKernel
    measure: SymmetricMeasure
    kernel_means: np.ndarray
    wce: float = float("nan")
    cond_estimate: float = float("nan")
    kernel_evaluations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def J(self) -> int:
        return self.node_set.J

    @property
    def n(self) -> int:
        return self.node_set.total_nodes

    def node_weights(self) -> np.ndarray:
        """Weights expanded to one entry per node, in node order."""
        return np.repeat(self.weights, self.node_set.sizes)

    def __call__(self, f) -> float:
        return integrate(self, f)

    @classmethod
    def empty(cls, kernel: GaussianKernel, measure: SymmetricMeasure) -> "FsQuadratureRule":
        rule = cls(SymmetricNodeSet([], measure.dim), np.zeros(0), kernel, measure, np.zeros(0))
        return _with_wce(rule)


def _with_wce(rule: FsQuadratureRule) -> FsQuadratureRule:
    object.__setattr__(rule, "wce", worst_case_error(rule))
    return rule


def make_rule(
    node_set: SymmetricNodeSet,
    k: GaussianKernel,
    mu: SymmetricMeasure,
    drop_center: bool = False,
    pivot_rtol: float = PIVOT_RTOL,
) -> FsQuadratureRule:
    """Kernel quadrature rule on ``node_set`` with one weight per fully symmetric set.

    ``drop_center`` removes the origin set (if any) before solving; it often
    carries a large negative weight.
    """
    if not isinstance(k, GaussianKernel):
        raise UnsupportedPairError(f"unsupported kernel {type(k).__name__}")
    if node_set.dim != mu.dim:
        raise InvalidDimensionError(f"node set dimension {node_set.dim} != measure dimension {mu.dim}")
    if drop_center:
        node_set = node_set.without_origin()
    if node_set.J == 0:
        raise EmptyNodeSetError("cannot build a rule on an empty node set")
    S = build_s_matrix(node_set, k)
    gens = np.array([g.values for g in node_set.generators])
    means = np.asarray(kernel_mean(k, mu, gens), dtype=float)
    w = solve_weights(S, means, pivot_rtol)
    cond = float(np.linalg.cond(S.values))
    rule = FsQuadratureRule(
        node_set,
        w,
        k,
        mu,
        means,
        cond_estimate=cond,
        kernel_evaluations=S.kernel_evaluations,
    )
    return _with_wce(rule)


def integrate(rule: FsQuadratureRule, f) -> float:
    """``sum_j w_j * sum_{x in set j} f(x)`` with exactly ``n`` evaluations of ``f``.

    ``f`` takes an ``(n, d)`` array and returns ``n`` values.
    """
    if rule.J == 0:
        return 0.0
    vals = evaluate_checked(f, rule.node_set.points)
    return integrate_values(rule, vals)


def integrate_values(rule: FsQuadratureRule, values) -> float:
    """Quadrature from precomputed integrand values in canonical node order."""
    vals = np.asarray(values, dtype=float).reshape(-1)
    if vals.size != rule.n:
        raise InvalidDimensionError(f"{vals.size} values for {rule.n} nodes")
    off = rule.node_set.offsets
    set_sums = np.array([np.sum(vals[off[j]:off[j + 1]]) for j in range(rule.J)])
    return float(np.dot(rule.weights, set_sums))


def worst_case_error(rule: FsQuadratureRule) -> float:
    """``sqrt(mu(k_mu) - sum_j w_j n_j k_mu(lambda_j))``, clamped at zero.

    Squared errors in ``[-1e-10, 0)`` are clamped silently; anything more
    negative also emits :class:`InstabilityWarning`.
    """
    init = initial_error_sq(rule.kernel, rule.measure)
    if rule.J == 0:
        return float(np.sqrt(init))
    sizes = np.asarray(rule.node_set.sizes, dtype=float)
    e2 = init - float(np.sum(rule.weights * sizes * rule.kernel_means))
    if e2 < 0:
        if e2 < WCE_CLAMP:
            warnings.warn(f"negative squared worst-case error {e2:.3e}", InstabilityWarning, stacklevel=2)
        e2 = 0.0
    return float(np.sqrt(e2))
