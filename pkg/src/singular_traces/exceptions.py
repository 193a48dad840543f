"""
Custom exceptions for the singular traces toolkit.

The command line maps these to exit codes: everything derived from
InvalidArgumentError (and ConfigurationError) exits with 2, everything derived
from NumericalFailureError exits with 3.
"""

from typing import Any, Dict, Optional


class SingularTracesError(Exception):
    """Base exception for the singular traces toolkit."""
    pass


class ConfigurationError(SingularTracesError):
    """Raised when there's a configuration error."""
    def __init__(self, message: str, error_code: Optional[str] = None):
        super().__init__(message)
        self.error_code = error_code


class InvalidArgumentError(SingularTracesError):
    """Raised when an argument violates an operation's precondition."""
    pass


class UnsupportedInputError(InvalidArgumentError):
    """Raised for well-formed input that the requested operation does not handle."""
    pass


class DomainError(InvalidArgumentError):
    """Raised when a point lies outside the domain of a function (e.g. Im z <= 0)."""
    pass


class PoleError(InvalidArgumentError):
    """Raised when a function is evaluated at one of its poles."""
    pass


class NumericalFailureError(SingularTracesError):
    """Raised when a computation cannot meet its error bound."""
    pass


class InsufficientDataError(NumericalFailureError):
    """Raised when coefficients or traces needed by a computation are missing."""
    def __init__(self, message: str, required: Optional[Any] = None):
        super().__init__(message)
        self.required = required


class DetectionError(NumericalFailureError):
    """Raised when the cusp width or phase of an expansion cannot be detected."""
    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
