"""
Utility functions for the bounds toolkit.
"""

from .errors import BoundsError, ConfigError, DomainError, OutputError, PrecisionError
from .helpers import derive_seed, setup_logging, validate_environment, wilson_interval, write_report

__all__ = [
    "BoundsError",
    "ConfigError",
    "DomainError",
    "OutputError",
    "PrecisionError",
    "derive_seed",
    "setup_logging",
    "validate_environment",
    "wilson_interval",
    "write_report",
]
