"""
Neyman-Pearson hypothesis-testing engine.
"""

from .samples import LlrSampleSet, ProbEstimate, SampleSide, TestPoint
from .neyman_pearson import (
    NeymanPearsonEstimator,
    alpha_from_samples,
    beta_from_samples,
    gaussian_alpha,
    gaussian_beta,
    q_function,
    q_inverse,
    weight_normalization,
)

__all__ = [
    "LlrSampleSet",
    "ProbEstimate",
    "SampleSide",
    "TestPoint",
    "NeymanPearsonEstimator",
    "alpha_from_samples",
    "beta_from_samples",
    "gaussian_alpha",
    "gaussian_beta",
    "q_function",
    "q_inverse",
    "weight_normalization",
]
