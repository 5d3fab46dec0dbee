"""
Sweep orchestration and rate-curve output.
"""

from .rate_curve import COLUMNS, SCHEMA_VERSION, RateCurve
from .runner import evaluate_point, run_sweep, run_validation

__all__ = ["COLUMNS", "SCHEMA_VERSION", "RateCurve", "evaluate_point", "run_sweep", "run_validation"]
