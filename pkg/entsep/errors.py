"""
Exceptions raised by the entsep library.

Input problems subclass ValueError and numerical failures subclass
RuntimeError, so callers that only know the builtins still catch them.
"""


class EntsepError(Exception):
    """Base class for all entsep errors."""


class InvalidInputError(EntsepError, ValueError):
    """Raised when a matrix, state or partition violates a stated invariant."""


class ConfigError(EntsepError, ValueError):
    """Raised for unknown configuration keys or out-of-range values."""


class LpBreakdownError(EntsepError, RuntimeError):
    """Raised when the simplex basis becomes numerically singular."""


class IntegrationError(EntsepError, RuntimeError):
    """Raised when an integration step produces non-finite values."""

    def __init__(self, message: str, step: int) -> None:
        super().__init__(message)
        self.step = step
