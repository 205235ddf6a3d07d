"""Generator collections: random draws, sparse grids and the radial optimum.

Sparse grids are built from nested, symmetric 1-D point sets ``X^1 = {0}``,
``X^1 ⊂ X^2 ⊂ ...``. The level-``q`` grid in ``d`` dimensions is the union of
the products ``X^{a_1} x ... x X^{a_d}`` over ``|a| = d + q``; it is a union of
fully symmetric sets whose generators take coordinate ``j`` from the
non-negative part of ``X^{a_j}`` for non-increasing ``a``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import CapExceededError, ConvergenceError, ValidationError
from .symmetry import DEFAULT_SET_CAP, GeneratorVector, canonicalize_generator, cardinality

CLENSHAW_CURTIS = "clenshaw_curtis"
GAUSS_HERMITE = "gauss_hermite"
NEST_TOL = 1e-14


@dataclass(frozen=True)
class NestedBasis:
    """Nested symmetric 1-D point sets; ``levels[i - 1]`` is ``X^i``, sorted ascending."""

    kind: str
    levels: tuple[tuple[float, ...], ...]
    q: int | None = None

    @property
    def max_level(self) -> int:
        return len(self.levels)

    def level(self, i: int) -> tuple[float, ...]:
        if not 1 <= i <= self.max_level:
            raise ValidationError(f"level {i} outside 1..{self.max_level} of this {self.kind} basis")
        return self.levels[i - 1]

    def nonnegative(self, i: int) -> tuple[float, ...]:
        return tuple(x for x in self.level(i) if x >= 0.0)

    def describe(self) -> dict:
        out = {"kind": self.kind, "levels": self.max_level}
        if self.q is not None:
            out["q"] = self.q
        return out


@lru_cache(maxsize=None)
def clenshaw_curtis_level(i: int, cap: int = DEFAULT_SET_CAP) -> tuple[float, ...]:
    """Clenshaw-Curtis level ``i``: ``{0}`` for ``i = 1``, else ``2^(i-1) + 1`` points.

    Points shared with level ``i - 1`` are bit-identical to it.
    """
    if i < 1:
        raise ValidationError(f"level must be >= 1, got {i}")
    if i == 1:
        return (0.0,)
    m = 2 ** (i - 1) + 1
    if m > cap:
        raise CapExceededError(f"Clenshaw-Curtis level {i} has {m} points, cap is {cap}")
    half = (m - 1) // 2
    # -cos(pi (j-1)/(m-1)) for the upper half of j is cos(pi t/(m-1)), t = 0..half
    pos = [math.cos(math.pi * t / (m - 1)) for t in range(half)] + [0.0]
    if i > 2:
        prev = [x for x in clenshaw_curtis_level(i - 1, cap) if x >= 0.0]
        for t, x in enumerate(pos):
            for p in prev:
                if abs(x - p) <= NEST_TOL:
                    pos[t] = p
                    break
    pts = sorted({-x for x in pos if x > 0.0} | set(pos))
    return tuple(pts)


def clenshaw_curtis_basis(max_level: int) -> NestedBasis:
    if max_level < 1:
        raise ValidationError(f"max_level must be >= 1, got {max_level}")
    return NestedBasis(CLENSHAW_CURTIS, tuple(clenshaw_curtis_level(i) for i in range(1, max_level + 1)))


def _hermite_normalized(p: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # orthonormal probabilists' Hermite values h_p, h_{p-1}; He_p = sqrt(p!) h_p
    h_prev = np.zeros_like(x)
    h = np.ones_like(x)
    for k in range(p):
        h_prev, h = h, (x * h - math.sqrt(k) * h_prev) / math.sqrt(k + 1)
    return h, h_prev


def hermite_roots(p: int, maxiter: int = 50) -> np.ndarray:
    """Roots of the probabilists' Hermite polynomial ``He_p``, ascending and exactly symmetric.

    Golub-Welsch eigenvalues, polished by Newton steps on the three-term
    recurrence.
    """
    if p < 1:
        raise ValidationError(f"degree must be >= 1, got {p}")
    off = np.sqrt(np.arange(1, p, dtype=float))
    x = np.sort(scipy.linalg.eigvalsh_tridiagonal(np.zeros(p), off))
    for _ in range(maxiter):
        h, h_prev = _hermite_normalized(p, x)
        step = h / (math.sqrt(p) * h_prev)
        x = x - step
        if np.all(np.abs(step) <= 1e-14 * np.maximum(1.0, np.abs(x))):
            break
    else:
        raise ConvergenceError(f"Newton iteration for He_{p} roots did not converge")
    x = np.sort(x)
    half = (np.abs(x) + np.abs(x[::-1])) / 2
    x = np.where(np.arange(p) < p // 2, -half, half)
    if p % 2:
        x[p // 2] = 0.0
    return x


def gauss_hermite_basis(q: int) -> NestedBasis:
    """Levels ``X^1..X^{q+1}`` from the ``2q + 1`` roots of ``He_{2q+1}``.

    ``X^i`` holds the ``2i - 1`` roots of smallest magnitude.
    """
    if q < 1:
        raise ValidationError(f"q must be >= 1, got {q}")
    roots = hermite_roots(2 * q + 1)
    pos = roots[q:]
    levels = []
    for i in range(1, q + 2):
        chosen = pos[:i]
        levels.append(tuple(sorted({-float(r) for r in chosen if r > 0} | {float(r) for r in chosen})))
    return NestedBasis(GAUSS_HERMITE, tuple(levels), q=q)


def make_basis(kind: str, q: int) -> NestedBasis:
    """A basis with enough levels for a level-``q`` sparse grid."""
    if kind in ("cc", CLENSHAW_CURTIS):
        return clenshaw_curtis_basis(q + 1)
    if kind in ("gh", GAUSS_HERMITE):
        return gauss_hermite_basis(q)
    raise ValidationError(f"unknown basis {kind!r}")


def non_increasing_indices(total: int, parts: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    """Non-increasing tuples of ``parts`` integers >= 1 summing to ``total``, lexicographically descending."""
    if largest is None:
        largest = total - parts + 1
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(largest, total - parts + 1), 0, -1):
        if first * parts < total:
            break
        for rest in non_increasing_indices(total - first, parts - 1, first):
            yield (first,) + rest


def sparse_grid_generators(
    q: int, d: int, basis: NestedBasis, cap: int = DEFAULT_SET_CAP
) -> list[GeneratorVector]:
    """Generators of the fully symmetric sets whose union is the level-``q`` sparse grid.

    Sorted lexicographically (origin first). Raises :class:`CapExceededError`
    before any expansion if the grid has more than ``cap`` points.
    """
    if q < 1:
        raise ValidationError(f"q must be >= 1, got {q}")
    if d < 1:
        raise ValidationError(f"d must be >= 1, got {d}")
    if basis.max_level < q + 1:
        raise ValidationError(f"level-{q} grid needs {q + 1} basis levels, basis has {basis.max_level}")
    seen: set[tuple[float, ...]] = set()
    for alpha in non_increasing_indices(d + q, d):
        active = [a for a in alpha if a > 1]
        choices = [basis.nonnegative(a) for a in active]
        for combo in itertools.product(*choices):
            g = canonicalize_generator(list(combo) + [0.0] * (d - len(active)))
            seen.add(g.values)
    gens = [GeneratorVector(v) for v in sorted(seen)]
    total = sum(cardinality(g) for g in gens)
    if total > cap:
        raise CapExceededError(f"sparse grid q={q}, d={d} has {total} nodes, cap is {cap}")
    return gens


def sparse_grid_size(q: int, d: int, basis: NestedBasis) -> tuple[int, int]:
    """(number of sets J, number of nodes n) without expanding anything."""
    gens = sparse_grid_generators(q, d, basis, cap=2**62)
    return len(gens), sum(cardinality(g) for g in gens)


def random_generators(
    J: int,
    d: int,
    kind: str = "std_gaussian",
    seed=None,
    truncate_below: float | None = None,
    max_attempts: int = 1000,
) -> list[GeneratorVector]:
    """``J`` distinct generators with coordinates ``|N(0,1)|`` or ``|U(-1,1)|``.

    ``truncate_below`` is a heuristic: entries below it are set to zero,
    which shrinks the sets.
    """
    if J < 0:
        raise ValidationError(f"J must be >= 0, got {J}")
    if kind not in ("std_gaussian", "uniform_cube"):
        raise ValidationError(f"unknown measure kind {kind!r}")
    rng = np.random.default_rng(seed)
    out: list[GeneratorVector] = []
    seen: set[tuple[float, ...]] = set()
    attempts = 0
    while len(out) < J:
        if kind == "std_gaussian":
            raw = np.abs(rng.standard_normal(d))
        else:
            raw = np.abs(rng.uniform(-1.0, 1.0, d))
        if truncate_below is not None:
            raw[raw < truncate_below] = 0.0
        g = canonicalize_generator(raw)
        if g.values in seen:
            attempts += 1
            if attempts > max_attempts:
                raise ValidationError("could not draw enough distinct generators; lower truncate_below")
            continue
        seen.add(g.values)
        out.append(g)
    return out


def radial_objective(lam, length_scale: float):
    """Quantity maximised by the best radius of the rule on ``[0,...,0]`` and ``[lam,0,...,0]``.

    Gaussian kernel, standard Gaussian measure.
    """
    lam2 = np.asarray(lam, dtype=float) ** 2
    ell2 = length_scale**2
    a = 1.0 / (2.0 * (1.0 + ell2))
    b = 1.0 / (2.0 * ell2)
    num = -np.exp(-a * lam2) * np.expm1(-(b - a) * lam2)
    den = -np.expm1(-lam2 / ell2)
    return num / den


def optimal_radial_generator(length_scale: float, xtol: float = 1e-10) -> float:
    """Radius minimising the worst-case error of the two-set radial rule."""
    if not length_scale > 0:
        raise ValidationError(f"length_scale must be positive, got {length_scale}")
    lo, hi = 1e-3 * length_scale, 10.0 * length_scale
    grid = np.geomspace(lo, hi, 4001)
    vals = radial_objective(grid, length_scale)
    i = int(np.argmax(vals))
    if i == 0 or i == grid.size - 1:
        raise ConvergenceError(
            f"objective maximum at the bracket edge for length_scale={length_scale}; rescale the problem"
        )
    res = scipy.optimize.minimize_scalar(
        lambda t: -float(radial_objective(t, length_scale)),
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden",
        options={"xtol": xtol / max(grid[i], 1.0)},
    )
    return float(res.x)
