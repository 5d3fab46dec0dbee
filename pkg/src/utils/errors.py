"""
Exception types shared across the bounds toolkit.
"""

from typing import Any, Optional


class BoundsError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(BoundsError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class PrecisionError(BoundsError, RuntimeError):
    """
    Monte-Carlo precision is insufficient for a required tail probability.

    Args:
        message: Human readable diagnostic
        estimate: The estimate that was attained (a ProbEstimate), if any
    """

    def __init__(self, message: str, estimate: Any = None):
        super().__init__(message)
        self.estimate = estimate


class ConfigError(BoundsError, ValueError):
    """A run configuration file is malformed."""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        prefix = ""
        if line is not None:
            prefix = f"line {line}: "
        elif field is not None:
            prefix = f"field {field}: "
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class OutputError(BoundsError, OSError):
    """An output file could not be written."""
