"""Kernel quadrature on unions of fully symmetric point sets."""

from .errors import FskqError, NumericalError, NumericalWarning, ValidationError
from .kernels import GaussianKernel, SymmetricMeasure, initial_error_sq, kernel_mean
from .nodes import (
    gauss_hermite_basis,
    clenshaw_curtis_basis,
    make_basis,
    optimal_radial_generator,
    random_generators,
    sparse_grid_generators,
)
from .symmetry import FullySymmetricSet, GeneratorVector, canonicalize_generator, cardinality, expand
from .weights import (
    FsQuadratureRule,
    SymmetricNodeSet,
    build_s_matrix,
    integrate,
    make_rule,
    naive_weights,
    solve_weights,
    worst_case_error,
)

__version__ = "0.1.0"
