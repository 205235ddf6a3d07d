"""Exception and warning types shared across the package.

Every error carries a short machine-readable ``code`` and the process exit
status the CLI maps it to.
"""

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3
EXIT_WARNINGS = 4


class FskqError(Exception):
    code = "error"
    exit_code = EXIT_VALIDATION


class ValidationError(FskqError, ValueError):
    code = "invalid-config"


class InvalidGeneratorError(ValidationError):
    code = "invalid-generator"


class InvalidDimensionError(ValidationError):
    code = "invalid-dimension"


class CardinalityOverflowError(ValidationError, OverflowError):
    code = "cardinality-overflow"


class SetTooLargeError(ValidationError):
    code = "set-too-large"


class DuplicateGeneratorError(ValidationError):
    code = "duplicate-generator"


class EmptyNodeSetError(ValidationError):
    code = "empty-node-set"


class UnsupportedPairError(ValidationError):
    code = "no-closed-form"


class CapExceededError(ValidationError):
    code = "cap-exceeded"


class NumericalError(FskqError, ArithmeticError):
    code = "numerical"
    exit_code = EXIT_NUMERICAL


class NonFiniteEvaluationError(NumericalError):
    code = "non-finite-evaluation"

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class SingularSystemError(NumericalError):
    code = "singular-system"

    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class ConvergenceError(NumericalError):
    code = "no-convergence"


class HashMismatchError(FskqError):
    code = "hash-mismatch"


class NumericalWarning(UserWarning):
    """Result was produced but may be inaccurate."""


class ResidualWarning(NumericalWarning):
    pass


class IllConditionedWarning(NumericalWarning):
    pass


class InstabilityWarning(NumericalWarning):
    pass


class DegenerateDataWarning(NumericalWarning):
    pass
