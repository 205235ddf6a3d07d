"""Gaussian kernel, the two fully symmetric measures and their kernel means."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import InvalidDimensionError, UnsupportedPairError, ValidationError
from .symmetry import apply_signed_permutation, random_signed_permutation

STD_GAUSSIAN = "std_gaussian"
UNIFORM_CUBE = "uniform_cube"
MEASURE_KINDS = (STD_GAUSSIAN, UNIFORM_CUBE)


@dataclass(frozen=True)
class GaussianKernel:
    """``scale * exp(-|x - y|^2 / (2 length_scale^2))``."""

    length_scale: float
    scale: float = 1.0

    def __post_init__(self):
        if not (self.length_scale > 0 and math.isfinite(self.length_scale)):
            raise ValidationError(f"length_scale must be positive, got {self.length_scale}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValidationError(f"scale must be positive, got {self.scale}")

    family = "gaussian"

    def __call__(self, x, y) -> np.ndarray:
        """Kernel values between broadcastable point arrays (last axis is the dimension)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape[-1] != y.shape[-1]:
            raise InvalidDimensionError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
        sq = np.sum((x - y) ** 2, axis=-1)
        return self.scale * np.exp(-sq / (2.0 * self.length_scale**2))

    def matrix(self, x, y=None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = x if y is None else np.atleast_2d(np.asarray(y, dtype=float))
        if x.shape[1] != y.shape[1]:
            raise InvalidDimensionError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
        sq = (
            np.sum(x**2, axis=1)[:, None]
            + np.sum(y**2, axis=1)[None, :]
            - 2.0 * x @ y.T
        )
        np.maximum(sq, 0.0, out=sq)
        if y is x:
            np.fill_diagonal(sq, 0.0)
        return self.scale * np.exp(-sq / (2.0 * self.length_scale**2))

    def to_dict(self) -> dict:
        return {"family": self.family, "length_scale": self.length_scale, "scale": self.scale}

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianKernel":
        if data.get("family", "gaussian") != "gaussian":
            raise UnsupportedPairError(f"unsupported kernel family {data.get('family')!r}")
        return cls(float(data["length_scale"]), float(data.get("scale", 1.0)))


@dataclass(frozen=True)
class SymmetricMeasure:
    """Standard Gaussian on R^d or the normalised uniform measure on [-1, 1]^d."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in MEASURE_KINDS:
            raise UnsupportedPairError(f"unknown measure kind {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise InvalidDimensionError(f"measure dimension must be >= 1, got {self.dim}")

    def density(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == STD_GAUSSIAN:
            return (2 * np.pi) ** (-self.dim / 2) * np.exp(-0.5 * np.sum(x**2, axis=1))
        inside = np.all(np.abs(x) <= 1.0, axis=1)
        return np.where(inside, 2.0 ** (-self.dim), 0.0)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == STD_GAUSSIAN:
            return rng.standard_normal((n, self.dim))
        return rng.uniform(-1.0, 1.0, size=(n, self.dim))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}

    @classmethod
    def from_dict(cls, data: dict) -> "SymmetricMeasure":
        kind = data.get("kind", data.get("measure"))
        return cls(kind, int(data["dim"]))


def kernel_eval(k: GaussianKernel, x, y) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    return float(k(x, y))


def _check_pair(k, mu: SymmetricMeasure):
    if not isinstance(k, GaussianKernel):
        raise UnsupportedPairError(f"no closed-form kernel mean for {type(k).__name__}")
    if mu.kind not in MEASURE_KINDS:
        raise UnsupportedPairError(f"no closed-form kernel mean for measure {mu.kind!r}")


def kernel_mean(k: GaussianKernel, mu: SymmetricMeasure, x) -> np.ndarray | float:
    """Integral of ``k(x, .)`` against ``mu``; vectorised over rows of ``x``."""
    _check_pair(k, mu)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != mu.dim:
        raise InvalidDimensionError(f"point dimension {x.shape[1]} != measure dimension {mu.dim}")
    ell2 = k.length_scale**2
    d = mu.dim
    if mu.kind == STD_GAUSSIAN:
        out = (ell2 / (1.0 + ell2)) ** (d / 2) * np.exp(-np.sum(x**2, axis=1) / (2.0 * (1.0 + ell2)))
    else:
        c = k.length_scale * math.sqrt(2.0)
        factors = erf((x + 1.0) / c) - erf((x - 1.0) / c)
        out = (math.pi * ell2 / 8.0) ** (d / 2) * np.prod(factors, axis=1)
    out = k.scale * out
    return float(out[0]) if single else out


def initial_error_sq(k: GaussianKernel, mu: SymmetricMeasure) -> float:
    """Double integral of the kernel against ``mu`` (squared WCE of the zero rule)."""
    _check_pair(k, mu)
    ell = k.length_scale
    d = mu.dim
    if mu.kind == STD_GAUSSIAN:
        val = (ell**2 / (2.0 + ell**2)) ** (d / 2)
    else:
        one_dim = math.sqrt(2.0 * ell**2 / math.pi) * math.expm1(-2.0 / ell**2) + 2.0 * math.erf(
            math.sqrt(2.0) / ell
        )
        val = (math.pi * ell**2 / 8.0) ** (d / 2) * one_dim**d
    return k.scale * val


def is_fully_symmetric_kernel(k, samples: int = 100, seed=None, dim: int = 3) -> bool:
    """Randomised check of ``k(Px, Py) == k(x, y)`` over signed permutations ``P``.

    ``k`` is any callable taking two 1-D points and returning a scalar.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x = rng.standard_normal(dim)
        y = rng.standard_normal(dim)
        perm, signs = random_signed_permutation(dim, rng)
        a = float(k(x, y))
        b = float(k(apply_signed_permutation(perm, signs, x), apply_signed_permutation(perm, signs, y)))
        if not abs(a - b) <= 1e-12:
            return False
    return True
