"""
Error handling utilities for clubforge.

This module defines the exception hierarchy shared by every layer of the
package and the graceful-degradation helpers used by the verification
battery. Each exception carries the process exit code the CLI maps it to
and renders itself as a machine-readable dictionary.
"""

import time
from typing import Any, Dict, Optional

from .logging_utils import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3


class ClubforgeError(Exception):
    """Base exception for clubforge errors."""

    exit_code = EXIT_VALIDATION

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        payload: Dict[str, Any] = {'error': type(self).__name__, 'message': self.message}
        payload.update(self.details)
        return payload


class NotPrimeError(ClubforgeError):
    """Raised when a field characteristic is not prime."""


class SizeBudgetExceededError(ClubforgeError):
    """Raised when a field or an enumeration exceeds the configured size cap."""

    exit_code = EXIT_BUDGET


class DivisionByZeroError(ClubforgeError):
    """Raised on division by the zero field element."""


class NotADivisorError(ClubforgeError):
    """Raised when a subfield degree does not divide the extension degree."""


class AmbientMismatchError(ClubforgeError):
    """Raised when operands live in different ambient spaces or fields."""


class DependentBasisError(ClubforgeError):
    """Raised when a basis that must be independent is not."""


class DegenerateRestrictionError(ClubforgeError):
    """Raised when the trace form restricted to a subspace is degenerate."""


class DegenerateSystemError(ClubforgeError):
    """Raised when a subspace does not span the full F_{q^m}-space."""


class NonIntegerSolutionError(ClubforgeError):
    """Raised when the MacWilliams system has a non-integral solution."""


class NegativeCoefficientError(ClubforgeError):
    """Raised when the MacWilliams system has a negative solution."""


class ParameterViolationError(ClubforgeError):
    """Raised when parameters break the preconditions of an operation."""


class NotMaximumScatteredError(ClubforgeError):
    """Raised when a supplied scattered part is not maximum scattered."""


class DimensionMismatchError(ClubforgeError):
    """Raised when dimensions of the inputs are inconsistent."""


class UnsupportedShapeError(ClubforgeError):
    """Raised when no built-in construction exists for the requested shape."""


class ConditionViolatedError(ClubforgeError):
    """Raised when a norm condition of a construction fails."""


class BudgetExceededError(ClubforgeError):
    """Raised when a search exceeds its subspace budget."""

    exit_code = EXIT_BUDGET


class ParameterMismatchError(ClubforgeError):
    """Raised when two objects compared must share parameters but do not."""


class ParseError(ClubforgeError):
    """Raised when an input document cannot be parsed."""


class ValidationError(ClubforgeError):
    """Raised when an input document parses but is not acceptable."""


class BasisExpansionFailureError(ClubforgeError):
    """Raised when the power basis fails to expand an element (internal)."""

    exit_code = EXIT_INTERNAL


class GracefulErrorHandler:
    """
    Context manager that records failures of an operation.

    Non-critical failures are logged and suppressed so that a battery of
    checks can keep going; critical ones propagate.
    """

    def __init__(self, operation_name: str, critical: bool = False):
        """
        Initialize the error handler.

        Args:
            operation_name: Name of the operation being protected
            critical: Whether errors in this operation should propagate
        """
        self.operation_name = operation_name
        self.critical = critical
        self.start_time: Optional[float] = None
        self.error_occurred = False
        self.error_details: Optional[Dict[str, Any]] = None

    def __enter__(self) -> 'GracefulErrorHandler':
        self.start_time = time.time()
        logger.debug("Starting protected operation", operation=self.operation_name)
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> bool:
        duration_ms = (time.time() - self.start_time) * 1000 if self.start_time else 0.0

        if exc_type is None:
            logger.debug("Protected operation completed",
                         operation=self.operation_name,
                         duration_ms=duration_ms)
            return False

        self.error_occurred = True
        self.error_details = {
            'type': exc_type.__name__,
            'message': str(exc_val),
            'operation': self.operation_name,
            'duration_ms': duration_ms,
        }

        if self.critical:
            logger.error("Critical operation failed",
                         operation=self.operation_name,
                         error=str(exc_val),
                         error_type=exc_type.__name__,
                         duration_ms=duration_ms)
            return False

        logger.warning("Non-critical operation failed gracefully",
                       operation=self.operation_name,
                       error=str(exc_val),
                       error_type=exc_type.__name__,
                       duration_ms=duration_ms)
        return True


def error_payload(exc: BaseException) -> Dict[str, Any]:
    """Render any exception as the structured error document written to stderr."""
    if isinstance(exc, ClubforgeError):
        return exc.to_dict()
    return {'error': type(exc).__name__, 'message': str(exc)}


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code."""
    if isinstance(exc, ClubforgeError):
        return exc.exit_code
    if isinstance(exc, ValueError):
        return EXIT_VALIDATION
    return EXIT_INTERNAL
