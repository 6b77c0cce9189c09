"""Exception hierarchy.

Every exception carries a stable machine-readable ``code`` which the CLI
prints verbatim and maps onto its exit status.
"""

from __future__ import annotations


class KBMError(Exception):
    code = "ERROR"
    exit_status = 1


class InvalidInputError(KBMError, ValueError):
    """Arguments outside the documented domain of an operation."""

    code = "INVALID_INPUT"
    exit_status = 2


class HypothesisViolation(KBMError, ValueError):
    """A hypothesis (radius, threshold, norm bound) is not met.

    ``quantity`` and ``limit`` record the violated inequality.
    """

    code = "HYPOTHESIS_VIOLATION"
    exit_status = 3

    def __init__(self, message: str, quantity: float | None = None, limit: float | None = None):
        super().__init__(message)
        self.quantity = quantity
        self.limit = limit


class NumericalError(KBMError, ArithmeticError):
    code = "NUMERICAL_FAILURE"
    exit_status = 4

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class EigenSolverError(NumericalError):
    code = "EIGENSOLVER_FAILURE"


class SingularityError(NumericalError):
    code = "SINGULAR_RESOLVENT"


class SpectralSeparationError(NumericalError):
    code = "SPECTRAL_SEPARATION"


class QuadratureError(NumericalError):
    code = "QUADRATURE_NONCONVERGENCE"


class TruncationError(NumericalError):
    code = "TRUNCATION_NONCONVERGENCE"
