"""
Sample containers and estimate types for Neyman-Pearson evaluation.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from src.utils.errors import DomainError


class SampleSide(str, Enum):
    """Measure a set of LLR samples was drawn under."""

    P = "P"
    Q = "Q"

    def other(self) -> "SampleSide":
        return SampleSide.Q if self is SampleSide.P else SampleSide.P


@dataclass(frozen=True)
class LlrSampleSet:
    """
    Monte-Carlo samples of L = log dP/dQ (nats).

    Attributes:
        values: Finite LLR values, read-only
        drawn_under: Measure the samples were drawn under
        seed: RNG seed the samples were produced from
        label: Free-form provenance (statistic/measure/channel)
    """

    values: np.ndarray
    drawn_under: SampleSide
    seed: int = 0
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise DomainError("LLR samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "drawn_under", SampleSide(self.drawn_under))

    @property
    def count(self) -> int:
        return int(self.values.size)

    def is_empty(self) -> bool:
        return self.values.size == 0

    def negated(self) -> "LlrSampleSet":
        """Samples of log dQ/dP: same draws, roles of P and Q swapped."""
        return LlrSampleSet(
            values=-self.values,
            drawn_under=self.drawn_under.other(),
            seed=self.seed,
            label=f"-({self.label})",
        )


@dataclass(frozen=True)
class TestPoint:
    """Randomized NP test: Z=1 iff L > threshold, Z=1 w.p. tau when L == threshold."""

    __test__ = False

    threshold: float
    tau: float

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise DomainError(f"randomization tau must lie in [0,1], got {self.tau}")


@dataclass(frozen=True)
class ProbEstimate:
    """
    A probability estimate with a confidence interval.

    The log-domain fields carry the same quantities for tails too small to be
    represented as floats.
    """

    value: float
    ci_low: float
    ci_high: float
    n_samples: int
    log_value: Optional[float] = None
    log_ci_low: Optional[float] = None
    log_ci_high: Optional[float] = None
    effective_samples: float = math.inf
    source: str = "exact"

    def __post_init__(self):
        if not (self.ci_low <= self.value <= self.ci_high):
            raise DomainError(
                f"confidence interval [{self.ci_low}, {self.ci_high}] does not bracket {self.value}"
            )
        if self.log_value is None:
            object.__setattr__(self, "log_value", _safe_log(self.value))
        if self.log_ci_low is None:
            object.__setattr__(self, "log_ci_low", _safe_log(self.ci_low))
        if self.log_ci_high is None:
            object.__setattr__(self, "log_ci_high", _safe_log(self.ci_high))

    @classmethod
    def exact(cls, value: float) -> "ProbEstimate":
        """An analytically known probability (zero-width interval)."""
        value = float(min(1.0, max(0.0, value)))
        return cls(value=value, ci_low=value, ci_high=value, n_samples=0)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)


def _safe_log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf
