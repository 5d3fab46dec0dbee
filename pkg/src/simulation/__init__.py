"""
Desk-scale decoder simulation for validating the joint achievability bound.
"""

from .oracle import (
    DECODING_ERROR,
    IDLE,
    Codebook,
    DecoderConfig,
    EmpiricalErrors,
    ValidationReport,
    decode,
    decode_batch,
    measure_errors,
    validate_joint_bound,
)

__all__ = [
    "DECODING_ERROR",
    "IDLE",
    "Codebook",
    "DecoderConfig",
    "EmpiricalErrors",
    "ValidationReport",
    "decode",
    "decode_batch",
    "measure_errors",
    "validate_joint_bound",
]
