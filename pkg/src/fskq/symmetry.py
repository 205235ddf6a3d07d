"""Generator vectors and the fully symmetric sets they span.

A fully symmetric set is the orbit of a non-negative generator vector under
all coordinate permutations and sign changes (the hyperoctahedral group).
Sets are materialised as ``(size, d)`` float arrays in a fixed order:
sign patterns in lexicographic order of their per-value negative counts,
and within each pattern the distinct permutations in lexicographic order
of their values.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CardinalityOverflowError,
    InvalidDimensionError,
    InvalidGeneratorError,
    NonFiniteEvaluationError,
    SetTooLargeError,
)

DEFAULT_TOL = 1e-12
DEFAULT_SET_CAP = 2**25
INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class GeneratorVector:
    """Canonical generator: non-negative values sorted in descending order.

    Build these through :func:`canonicalize_generator`; the constructor only
    checks that ``values`` is already canonical. Equality and hashing are
    exact on the canonical values; use :meth:`close_to` for the tolerant
    comparison.
    """

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) == 0:
            raise InvalidDimensionError("generator dimension must be >= 1")
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if any(v < 0 for v in vals):
            raise InvalidGeneratorError(f"generator has negative entries: {vals}")
        if any(a < b for a, b in zip(vals, vals[1:])):
            raise InvalidGeneratorError(f"generator is not sorted descending: {vals}")

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def multiplicities(self) -> list[tuple[float, int]]:
        """(value, count) for each distinct non-zero value, largest first."""
        out: list[tuple[float, int]] = []
        for v in self.values:
            if v == 0.0:
                break
            if out and out[-1][0] == v:
                out[-1] = (v, out[-1][1] + 1)
            else:
                out.append((v, 1))
        return out

    @property
    def zero_count(self) -> int:
        return sum(1 for v in self.values if v == 0.0)

    @property
    def nonzero_count(self) -> int:
        return self.dim - self.zero_count

    @property
    def norm_sq(self) -> float:
        return math.fsum(v * v for v in self.values)

    def is_origin(self) -> bool:
        return self.zero_count == self.dim

    def close_to(self, other: "GeneratorVector", tol: float = DEFAULT_TOL) -> bool:
        if self.dim != other.dim:
            return False
        return all(abs(a - b) <= tol for a, b in zip(self.values, other.values))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


def canonicalize_generator(raw: Sequence[float], tol: float = DEFAULT_TOL) -> GeneratorVector:
    """Sort ``raw`` descending, snap near-zeros to 0 and merge near-ties.

    Entries within ``tol`` of zero become exactly zero. After sorting, entries
    within ``tol`` of the largest member of their run are replaced by the
    run's smallest member.
    """
    vals = [float(v) for v in raw]
    if len(vals) == 0:
        raise InvalidDimensionError("generator dimension must be >= 1")
    for v in vals:
        if not math.isfinite(v):
            raise InvalidGeneratorError(f"non-finite generator entry {v!r}")
        if v < -tol:
            raise InvalidGeneratorError(f"negative generator entry {v!r}")
    vals = [0.0 if abs(v) <= tol else v for v in vals]
    vals.sort(reverse=True)
    # a run starts at its largest entry and takes everything within tol of it;
    # the whole run becomes its smallest member, so input order never matters
    i = 0
    while i < len(vals) and vals[i] != 0.0:
        j = i + 1
        while j < len(vals) and vals[j] != 0.0 and vals[i] - vals[j] <= tol:
            j += 1
        vals[i:j] = [vals[j - 1]] * (j - i)
        i = j
    return GeneratorVector(tuple(vals))


def cardinality(gen: GeneratorVector) -> int:
    """Number of points in the fully symmetric set of ``gen``.

    ``2^m d! / (m0! m1! ... ml!)`` in exact integer arithmetic. Results that
    do not fit a signed 64-bit integer raise :class:`CardinalityOverflowError`;
    ``d <= 20`` with at most 9 non-zero entries is always safe.
    """
    d = gen.dim
    denom = math.factorial(gen.zero_count)
    for _, count in gen.multiplicities:
        denom *= math.factorial(count)
    n = (2 ** gen.nonzero_count) * math.factorial(d) // denom
    if n > INT64_MAX:
        raise CardinalityOverflowError(f"cardinality of {gen.values} exceeds 64-bit range")
    return n


@lru_cache(maxsize=4096)
def _multinomial(counts: tuple[int, ...]) -> int:
    out = math.factorial(sum(counts))
    for c in counts:
        out //= math.factorial(c)
    return out


def _fill_arrangements(out: np.ndarray, col: int, counts: list[int], symbols: np.ndarray):
    # Writes the distinct arrangements of the multiset ``counts`` of ``symbols``
    # into columns col: of ``out``, in lexicographic order of symbol index.
    live = [s for s, c in enumerate(counts) if c > 0]
    if len(live) == 1:
        out[:, col:] = symbols[live[0]]
        return
    start = 0
    for s in live:
        counts[s] -= 1
        block = _multinomial(tuple(counts))
        sub = out[start:start + block]
        sub[:, col] = symbols[s]
        if col + 1 < out.shape[1]:
            _fill_arrangements(sub, col + 1, counts, symbols)
        counts[s] += 1
        start += block


@dataclass(frozen=True, eq=False)
class FullySymmetricSet:
    generator: GeneratorVector
    points: np.ndarray

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.generator.dim

    def __len__(self) -> int:
        return self.size

    def contains(self, x, atol: float = 0.0) -> bool:
        diff = np.abs(self.points - np.asarray(x, dtype=float)[None, :])
        return bool(np.any(np.all(diff <= atol, axis=1)))


def expand(gen: GeneratorVector, cap: int = DEFAULT_SET_CAP) -> FullySymmetricSet:
    """Materialise the orbit of ``gen``.

    For every sign pattern (how many copies of each distinct non-zero value
    are negated) the distinct permutations of the signed vector are listed;
    working on symbol indices keeps repeated values from producing
    duplicates.
    """
    size = cardinality(gen)
    if size > cap:
        raise SetTooLargeError(f"set of {gen.values} has {size} points, cap is {cap}")
    mults = gen.multiplicities
    m0 = gen.zero_count
    points = np.empty((size, gen.dim))
    row = 0
    for negs in itertools.product(*(range(c + 1) for _, c in mults)):
        # symbols in ascending value order: -u1 < -u2 < ... < 0 < ... < u2 < u1
        symbols = [-u for u, _ in mults] + [0.0] + [u for u, _ in reversed(mults)]
        counts = (
            list(negs)
            + [m0]
            + [c - a for (_, c), a in zip(reversed(mults), reversed(negs))]
        )
        keep = [i for i, c in enumerate(counts) if c > 0]
        counts = [counts[i] for i in keep]
        block = _multinomial(tuple(counts))
        _fill_arrangements(points[row:row + block], 0, counts, np.array([symbols[i] for i in keep]))
        row += block
    points.setflags(write=False)
    assert row == size
    return FullySymmetricSet(gen, points)


def sum_over_set(f: Callable[[np.ndarray], np.ndarray], fss: FullySymmetricSet) -> float:
    """Sum of ``f`` over the points of ``fss``.

    ``f`` takes an ``(n, d)`` array and returns ``n`` values.
    """
    vals = evaluate_checked(f, fss.points)
    return float(np.sum(vals))


EVAL_CHUNK = 2**15


def evaluate_checked(f, points: np.ndarray, chunk: int = EVAL_CHUNK) -> np.ndarray:
    """``f`` on the rows of ``points`` in row chunks, rejecting non-finite values."""
    vals = np.empty(points.shape[0])
    for start in range(0, points.shape[0], chunk):
        part = points[start:start + chunk]
        out = np.asarray(f(part), dtype=float).reshape(-1)
        if out.shape[0] != part.shape[0]:
            raise ValueError(f"integrand returned {out.shape[0]} values for {part.shape[0]} points")
        vals[start:start + chunk] = out
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise NonFiniteEvaluationError(
            f"integrand is {vals[i]} at point {points[i].tolist()}", point=points[i].copy()
        )
    return vals


def random_signed_permutation(d: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """A uniformly random element of the hyperoctahedral group as (perm, signs)."""
    return rng.permutation(d), rng.choice(np.array([-1.0, 1.0]), size=d)


def apply_signed_permutation(perm: np.ndarray, signs: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return signs * x[..., perm]
