"""
Custom exceptions for crel.
"""

from typing import Optional, Dict, Any
from .models import ErrorCode


class CrelException(Exception):
    """Base exception for crel errors."""

    def __init__(
        self,
        code: ErrorCode,
        message: str,
        details: Optional[Dict[str, Any]] = None
    ):
        self.code = code
        self.message = message
        self.details = details
        super().__init__(message)

    @property
    def exit_code(self) -> int:
        return self.code.exit_code


class DomainError(CrelException):
    """Argument outside its admissible range."""

    def __init__(
        self,
        message: str = "Argument outside its domain",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.DOMAIN_ERROR, message=message, details=details)


class SchemaError(CrelException):
    """Dataset lacks the columns an operation needs."""

    def __init__(
        self,
        message: str = "Dataset does not match the required schema",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.SCHEMA_ERROR, message=message, details=details)


class NonSmoothError(CrelException):
    """Derivative requested from a non-smooth estimating function."""

    def __init__(
        self,
        message: str = "Estimating function is not differentiable",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.NON_SMOOTH, message=message, details=details)


class ConvergenceError(CrelException):
    """Newton iteration did not reach tolerance."""

    def __init__(
        self,
        message: str = "Iteration did not converge",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.CONVERGENCE_FAILED, message=message, details=details)


class HullError(CrelException):
    """Zero is not interior to the convex hull of the estimating functions."""

    def __init__(
        self,
        message: str = "Zero is outside the convex hull of psi",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.HULL_INFEASIBLE, message=message, details=details)


class SingularityError(CrelException):
    """Moment matrix is singular."""

    def __init__(
        self,
        message: str = "Moment matrix is not positive definite",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.SINGULAR_MATRIX, message=message, details=details)


class ExpansionError(CrelException):
    """Quantile expansion could not be inverted."""

    def __init__(
        self,
        message: str = "Quantile expansion is not monotone on the search interval",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.EXPANSION_FAILED, message=message, details=details)


class SamplerError(CrelException):
    """Markov chain could not be run."""

    def __init__(
        self,
        message: str = "Posterior sampler failed",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.SAMPLER_FAILED, message=message, details=details)


class DegenerateError(CrelException):
    """Chain has no spread."""

    def __init__(
        self,
        message: str = "All retained draws are equal",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.DEGENERATE_CHAIN, message=message, details=details)


class QuadratureError(CrelException):
    """Numerical integration failed or diverged."""

    def __init__(
        self,
        message: str = "Quadrature did not produce a finite value",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.QUADRATURE_FAILED, message=message, details=details)


class UsageError(CrelException):
    """Bad command-line usage or unparseable input."""

    def __init__(
        self,
        message: str = "Invalid request",
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(code=ErrorCode.INVALID_REQUEST, message=message, details=details)
