import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import initial_error_quad_1d, kernel_mean_quad, kernel_mean_quad_2d
from fskq.errors import InvalidDimensionError, UnsupportedPairError, ValidationError
from fskq.kernels import (
    GaussianKernel,
    SymmetricMeasure,
    initial_error_sq,
    is_fully_symmetric_kernel,
    kernel_eval,
    kernel_mean,
)
from fskq.symmetry import apply_signed_permutation, random_signed_permutation

MEASURES = ("std_gaussian", "uniform_cube")
ELLS = (0.5, 1.0, 2.0)


def test_kernel_basic_values():
    k = GaussianKernel(0.7, scale=2.5)
    x = np.array([0.3, -1.0])
    assert kernel_eval(k, x, x) == 2.5
    assert math.isclose(kernel_eval(GaussianKernel(1.3), [0.0], [1.3 * math.sqrt(2)]), math.exp(-1), rel_tol=1e-15)


def test_kernel_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        kernel_eval(GaussianKernel(1.0), [0.0, 1.0], [0.0])


@pytest.mark.parametrize("ell,scale", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (float("nan"), 1.0)])
def test_kernel_rejects_bad_parameters(ell, scale):
    with pytest.raises(ValidationError):
        GaussianKernel(ell, scale)


@pytest.mark.invariant
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_kernel_symmetric_and_invariant(d, seed):
    rng = np.random.default_rng(seed)
    k = GaussianKernel(rng.uniform(0.2, 3.0))
    x, y = rng.standard_normal((2, d))
    perm, signs = random_signed_permutation(d, rng)
    assert kernel_eval(k, x, y) == kernel_eval(k, y, x)
    px, py = apply_signed_permutation(perm, signs, x), apply_signed_permutation(perm, signs, y)
    assert math.isclose(kernel_eval(k, px, py), kernel_eval(k, x, y), rel_tol=1e-14)


def test_matrix_matches_pairwise(rng):
    k = GaussianKernel(0.9)
    X = rng.standard_normal((7, 3))
    K = k.matrix(X)
    ref = np.array([[kernel_eval(k, a, b) for b in X] for a in X])
    assert np.allclose(K, ref, rtol=1e-13, atol=0)
    assert np.all(np.diag(K) == 1.0)


def test_measure_validation():
    with pytest.raises(UnsupportedPairError):
        SymmetricMeasure("lebesgue", 2)
    with pytest.raises(InvalidDimensionError):
        SymmetricMeasure("std_gaussian", 0)


@pytest.mark.invariant
@pytest.mark.parametrize("kind", MEASURES)
def test_density_fully_symmetric_and_normalised(kind, rng):
    mu = SymmetricMeasure(kind, 2)
    x = rng.uniform(-0.9, 0.9, (50, 2))
    perm, signs = random_signed_permutation(2, rng)
    assert np.allclose(mu.density(x), mu.density(apply_signed_permutation(perm, signs, x)), rtol=1e-15)
    from scipy import integrate

    lim = 1.0 if kind == "uniform_cube" else 12.0
    total, _ = integrate.dblquad(lambda b, a: mu.density([a, b])[0], -lim, lim, -lim, lim)
    assert math.isclose(total, 1.0, rel_tol=1e-8)


def test_gaussian_mean_at_origin():
    for d in (1, 2, 5):
        for ell in ELLS:
            k = GaussianKernel(ell)
            got = kernel_mean(k, SymmetricMeasure("std_gaussian", d), np.zeros(d))
            assert math.isclose(got, (ell**2 / (1 + ell**2)) ** (d / 2), rel_tol=1e-15)


@pytest.mark.parametrize("kind", MEASURES)
@pytest.mark.parametrize("ell", ELLS)
def test_kernel_mean_vs_quadrature_1d(kind, ell, rng):
    k = GaussianKernel(ell)
    mu = SymmetricMeasure(kind, 1)
    xs = rng.uniform(-2.5, 2.5, 100) if kind == "std_gaussian" else rng.uniform(-1.5, 1.5, 100)
    got = kernel_mean(k, mu, xs[:, None])
    ref = np.array([kernel_mean_quad(x, ell, kind) for x in xs])
    assert np.max(np.abs(got - ref) / ref) <= 1e-8


@pytest.mark.parametrize("kind", MEASURES)
def test_kernel_mean_vs_quadrature_2d(kind, rng):
    k = GaussianKernel(1.0)
    mu = SymmetricMeasure(kind, 2)
    xs = rng.uniform(-1.2, 1.2, (10, 2))
    got = kernel_mean(k, mu, xs)
    ref = np.array([kernel_mean_quad_2d(x, 1.0, kind) for x in xs])
    assert np.max(np.abs(got - ref) / ref) <= 1e-8


@pytest.mark.invariant
@pytest.mark.parametrize("kind", MEASURES)
def test_kernel_mean_fully_symmetric(kind, rng):
    k = GaussianKernel(0.8)
    mu = SymmetricMeasure(kind, 4)
    for _ in range(20):
        x = rng.uniform(-1, 1, 4)
        perm, signs = random_signed_permutation(4, rng)
        assert math.isclose(kernel_mean(k, mu, x), kernel_mean(k, mu, apply_signed_permutation(perm, signs, x)),
                            rel_tol=1e-13)


@pytest.mark.invariant
def test_gaussian_mean_radially_decreasing():
    k = GaussianKernel(1.1)
    mu = SymmetricMeasure("std_gaussian", 3)
    r = np.linspace(0, 5, 50)
    vals = kernel_mean(k, mu, np.c_[r, np.zeros_like(r), np.zeros_like(r)])
    assert np.all(np.diff(vals) < 0)


@pytest.mark.invariant
@given(st.sampled_from(MEASURES), st.integers(1, 6), st.floats(0.1, 5.0), st.floats(0.1, 3.0))
def test_mean_and_initial_error_bounds(kind, d, ell, scale):
    k = GaussianKernel(ell, scale)
    mu = SymmetricMeasure(kind, d)
    x = np.random.default_rng(d).uniform(-3, 3, (20, d))
    m = kernel_mean(k, mu, x)
    assert np.all(m >= 0) and np.all(m <= scale)
    e0 = initial_error_sq(k, mu)
    assert 0 < e0 <= scale


def test_kernel_mean_positive_far_away():
    k = GaussianKernel(1.0)
    assert kernel_mean(k, SymmetricMeasure("std_gaussian", 2), np.array([5.0, 5.0])) > 0


@pytest.mark.parametrize("kind", MEASURES)
@pytest.mark.parametrize("ell", ELLS)
def test_initial_error_vs_quadrature(kind, ell):
    got = initial_error_sq(GaussianKernel(ell), SymmetricMeasure(kind, 1))
    assert math.isclose(got, initial_error_quad_1d(ell, kind), rel_tol=1e-8)


def test_initial_error_gaussian_monte_carlo():
    rng = np.random.default_rng(3)
    k = GaussianKernel(1.0)
    x, y = rng.standard_normal((2, 1_000_000))
    mc = float(np.mean(np.exp(-((x - y) ** 2) / 2)))
    exact = initial_error_sq(k, SymmetricMeasure("std_gaussian", 1))
    assert math.isclose(exact, 1 / math.sqrt(3), rel_tol=1e-15)
    assert abs(mc - exact) < 5e-3


def test_initial_error_is_dth_power():
    k = GaussianKernel(0.6)
    for kind in MEASURES:
        roots = [initial_error_sq(k, SymmetricMeasure(kind, d)) ** (1 / d) for d in (1, 2, 3, 7)]
        assert np.allclose(roots, roots[0], rtol=1e-12)


@pytest.mark.invariant
@pytest.mark.parametrize("kind", MEASURES)
def test_initial_error_equals_mean_of_kernel_mean(kind):
    rng = np.random.default_rng(11)
    k = GaussianKernel(0.9)
    mu = SymmetricMeasure(kind, 2)
    mc = float(np.mean(kernel_mean(k, mu, mu.sample(400_000, rng))))
    assert abs(mc - initial_error_sq(k, mu)) < 3e-3


def test_unsupported_pair():
    class Other:
        length_scale = 1.0
        scale = 1.0

    with pytest.raises(UnsupportedPairError):
        kernel_mean(Other(), SymmetricMeasure("std_gaussian", 1), [0.0])
    with pytest.raises(UnsupportedPairError):
        initial_error_sq(Other(), SymmetricMeasure("std_gaussian", 1))


def test_fully_symmetric_kernel_check():
    assert is_fully_symmetric_kernel(GaussianKernel(1.0), seed=0)
    scales = np.array([0.5, 1.0, 2.0])
    aniso = lambda x, y: math.exp(-np.sum(((x - y) / scales) ** 2) / 2)
    assert not is_fully_symmetric_kernel(aniso, seed=0)
    product = lambda x, y: math.prod(1.0 / (1.0 + (a - b) ** 2) for a, b in zip(x, y))
    assert is_fully_symmetric_kernel(product, seed=0)


def test_serialization_round_trip():
    k = GaussianKernel(0.1 + 0.2, 3.0)
    assert GaussianKernel.from_dict(k.to_dict()) == k
    mu = SymmetricMeasure("uniform_cube", 4)
    assert SymmetricMeasure.from_dict(mu.to_dict()) == mu
