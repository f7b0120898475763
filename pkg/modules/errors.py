"""
Exception hierarchy for the rank-correlation engine.

Each error carries the process exit code the command-line front end uses
when it surfaces that error.
"""

from config.copula_constants import (
    EXIT_INPUT_ERROR,
    EXIT_NUMERIC_ERROR,
    EXIT_NOT_ATTAINABLE,
    EXIT_TIES
)


class CopulaError(Exception):
    """Base class for all engine errors."""

    exit_code = EXIT_NUMERIC_ERROR


class DomainError(CopulaError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code = EXIT_INPUT_ERROR


class SpecValidationError(CopulaError, ValueError):
    """A copula specification document is malformed or inconsistent."""

    exit_code = EXIT_INPUT_ERROR


class IntegrationError(CopulaError):
    """An integrand produced a non-finite value."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class MatrixError(CopulaError):
    """A correlation matrix is not positive semidefinite or cannot be factorized."""


class NoConvergence(CopulaError):
    """A root finder exhausted its iteration budget."""


class NonIdentified(CopulaError):
    """The moment equations do not pin down a unique parameter value."""


class OutOfAttainableRange(CopulaError):
    """A target rank correlation cannot be reached at the given skewness and mixing."""

    exit_code = EXIT_NOT_ATTAINABLE

    def __init__(self, message, attainable):
        super().__init__(message)
        self.attainable = tuple(attainable)


class TieError(CopulaError):
    """Exact ties in a sample; rank statistics assume continuous margins."""

    exit_code = EXIT_TIES

    def __init__(self, message, coordinate):
        super().__init__(message)
        self.coordinate = coordinate
