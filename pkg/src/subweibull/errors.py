"""
Exception hierarchy for subweibull

The CLI maps each family to an exit code: ConfigError -> 1,
DomainError -> 2, NumericalError -> 3.
"""

from typing import Any, Dict, Optional


class SubWeibullError(Exception):
    """Base class for all errors raised by subweibull"""

    exit_code = 3

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = diagnostics or {}


class ConfigError(SubWeibullError):
    """Malformed or unknown configuration"""

    exit_code = 1


class DomainError(SubWeibullError, ValueError):
    """Input outside the domain of an operation (alpha <= 0, p < 1, t below threshold, ...)"""

    exit_code = 2


class NumericalError(SubWeibullError, RuntimeError):
    """A numerical routine failed to produce a certified answer"""

    exit_code = 3


class ConvergenceError(NumericalError):
    """Bisection or quadrature did not reach tolerance"""


class MonotonicityError(NumericalError):
    """A map assumed monotone was observed not to be"""


class DivergenceError(NumericalError):
    """An expectation is infinite for every tried scale"""
