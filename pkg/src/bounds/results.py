"""
Result types shared by the rate bounds.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Tuple

from src.utils.errors import DomainError


@dataclass(frozen=True)
class TargetProbabilities:
    """Admissibility targets: false alarm, misdetection and inclusive error."""

    efa: float
    emd: float
    eie: float

    def __post_init__(self):
        for name in ("efa", "emd", "eie"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise DomainError(f"{name} must lie in (0,1), got {value}")


class BoundKind(str, Enum):
    JOINT_ACH = "JOINT_ACH"
    ENSEMBLE_CONV = "ENSEMBLE_CONV"
    METACONVERSE = "METACONVERSE"
    DT_GENIE = "DT_GENIE"
    PREAMBLE_ACH = "PREAMBLE_ACH"
    PREAMBLE_CONV = "PREAMBLE_CONV"


class BoundFlag(str, Enum):
    NONE = "NONE"
    INFEASIBLE_DETECTION = "INFEASIBLE_DETECTION"
    INDICATOR_VIOLATED = "INDICATOR_VIOLATED"
    DEGENERATE = "DEGENERATE"
    CAPPED = "CAPPED"


@dataclass(frozen=True)
class BoundResult:
    """
    A bound on log2(M) for blocklength n.

    Attributes:
        log2m: Bound value in bits
        n: Total blocklength the rate refers to
        bound_kind: Which bound produced the value
        ci_low: Lower end of the Monte-Carlo confidence interval on log2m
        ci_high: Upper end of the Monte-Carlo confidence interval on log2m
        params: Free parameters at their optimizing values
        flags: Outcome flags (zero-rate reasons, capping)
    """

    log2m: float
    n: int
    bound_kind: BoundKind
    ci_low: float
    ci_high: float
    params: Dict[str, Any] = field(default_factory=dict)
    flags: Tuple[BoundFlag, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be positive, got {self.n}")
        if self.log2m < 0 or math.isnan(self.log2m):
            raise DomainError(f"log2M must be nonnegative, got {self.log2m}")
        if not self.ci_low <= self.log2m <= self.ci_high:
            raise DomainError(
                f"confidence interval [{self.ci_low}, {self.ci_high}] does not bracket {self.log2m}"
            )
        object.__setattr__(self, "bound_kind", BoundKind(self.bound_kind))
        object.__setattr__(self, "flags", tuple(BoundFlag(f) for f in self.flags))

    @property
    def rate(self) -> float:
        """Bits per channel use."""
        return self.log2m / self.n

    @property
    def m(self) -> float:
        return 2.0 ** self.log2m

    @property
    def is_zero(self) -> bool:
        return self.log2m == 0.0

    def has_flag(self, flag: BoundFlag) -> bool:
        return BoundFlag(flag) in self.flags

    def flag_string(self) -> str:
        return "|".join(f.value for f in self.flags) if self.flags else BoundFlag.NONE.value

    def with_params(self, **extra) -> "BoundResult":
        params = dict(self.params)
        params.update(extra)
        return BoundResult(self.log2m, self.n, self.bound_kind, self.ci_low, self.ci_high,
                           params, self.flags)

    @classmethod
    def zero(cls, kind: BoundKind, n: int, flag: BoundFlag, **params) -> "BoundResult":
        """A zero-rate result carrying the reason."""
        return cls(0.0, n, kind, 0.0, 0.0, params, (flag,))
