"""
Configuration package for the bounds toolkit.
"""

from .settings import Settings, MonteCarloConfig, settings
from .sweep_config import SweepConfig, ValidationConfig, load_sweep_config, load_validation_config

__all__ = [
    "Settings",
    "MonteCarloConfig",
    "settings",
    "SweepConfig",
    "ValidationConfig",
    "load_sweep_config",
    "load_validation_config",
]
