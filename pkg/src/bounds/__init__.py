"""
Achievability and converse bounds on the maximum coding rate.
"""

from .results import BoundFlag, BoundKind, BoundResult, TargetProbabilities
from .joint import (
    OperatingPoint,
    dt_genie,
    ensemble_converse,
    joint_achievability,
    metaconverse,
    optimize_p,
    joint_operating_point,
)
from .preamble import (
    DetectionTradeoff,
    PreambleSplit,
    detection_tradeoff,
    minimum_preamble_length,
    optimize_np,
    preamble_achievability,
    preamble_converse,
)

__all__ = [
    "BoundFlag",
    "BoundKind",
    "BoundResult",
    "TargetProbabilities",
    "OperatingPoint",
    "dt_genie",
    "ensemble_converse",
    "joint_achievability",
    "metaconverse",
    "optimize_p",
    "joint_operating_point",
    "DetectionTradeoff",
    "PreambleSplit",
    "detection_tradeoff",
    "minimum_preamble_length",
    "optimize_np",
    "preamble_achievability",
    "preamble_converse",
]
