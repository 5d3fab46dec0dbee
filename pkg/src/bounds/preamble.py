"""
Preamble-based detection followed by separate decoding.

A known all-(+sqrt(rho)) preamble of n_p symbols is tested against noise with
the statistic sum_k x_k Y_k, whose law is Gaussian under both hypotheses; the
remaining n_d = n - n_p symbols carry a random code with p = 1/2.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from src.bounds.joint import (
    DecodingScan,
    bracket,
    finalize_log2m,
    information_estimator,
    metaconverse_block,
)
from src.bounds.results import BoundFlag, BoundKind, BoundResult, TargetProbabilities
from src.channel.biawgn import ChannelSpec
from src.config.settings import MonteCarloConfig, settings
from src.stats.neyman_pearson import gaussian_alpha, q_inverse
from src.utils.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreambleSplit:
    """Preamble length n_p and data length n_d."""

    n_p: int
    n_d: int

    def __post_init__(self):
        if int(self.n_p) != self.n_p or self.n_p < 0:
            raise DomainError(f"n_p must be a nonnegative integer, got {self.n_p}")
        if int(self.n_d) != self.n_d or self.n_d < 1:
            raise DomainError(f"n_d must be a positive integer, got {self.n_d}")
        object.__setattr__(self, "n_p", int(self.n_p))
        object.__setattr__(self, "n_d", int(self.n_d))

    @classmethod
    def from_total(cls, n: int, n_p: int) -> "PreambleSplit":
        return cls(n_p=n_p, n_d=n - n_p)

    @property
    def n(self) -> int:
        return self.n_p + self.n_d


@dataclass(frozen=True)
class DetectionTradeoff:
    """Misdetection probability of the preamble test at a false-alarm level."""

    emd: float
    efa: float
    gamma: float
    degenerate: bool = False


def detection_tradeoff(n_p: int, rho: float, efa: float) -> DetectionTradeoff:
    """
    Closed-form preamble detection tradeoff.

    Under noise the correlation LLR is N(-n_p rho/2, n_p rho), with a preamble
    N(+n_p rho/2, n_p rho). The threshold meeting efa is
    gamma = sqrt(n_p rho) Q^{-1}(efa) - n_p rho / 2.

    Args:
        n_p: Preamble length (0 gives the blind randomized guess)
        rho: Linear SNR
        efa: False-alarm probability

    Returns:
        DetectionTradeoff; for n_p = 0, emd = 1 - efa flagged degenerate
    """
    if int(n_p) != n_p or n_p < 0:
        raise DomainError(f"n_p must be a nonnegative integer, got {n_p}")
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if not 0.0 < efa < 1.0:
        raise DomainError(f"efa must lie in (0,1), got {efa}")
    if n_p == 0:
        return DetectionTradeoff(emd=1.0 - efa, efa=efa, gamma=math.nan, degenerate=True)

    energy = n_p * rho
    gamma = math.sqrt(energy) * float(q_inverse(efa)) - 0.5 * energy
    emd = gaussian_alpha(0.5 * energy, -0.5 * energy, energy, efa)
    return DetectionTradeoff(emd=emd, efa=efa, gamma=gamma)


def minimum_preamble_length(n: int, rho: float, targets: TargetProbabilities) -> Optional[int]:
    """Smallest n_p in [1, n-1] whose detection tradeoff meets emd, or None."""
    for n_p in range(1, n):
        if detection_tradeoff(n_p, rho, targets.efa).emd <= targets.emd:
            return n_p
    return None


def _mc(mc: Optional[MonteCarloConfig]) -> MonteCarloConfig:
    return mc or settings.get_mc_config()


def _check_split(spec: ChannelSpec, split: PreambleSplit):
    if split.n != spec.n:
        raise DomainError(f"split n_p + n_d = {split.n} does not match blocklength {spec.n}")


def _data_scan(rho: float, n_d: int, mc: MonteCarloConfig) -> DecodingScan:
    return DecodingScan(information_estimator(ChannelSpec(rho=rho, p=0.5, n=n_d), mc))


def _achievability_from_scan(scan: DecodingScan, split: PreambleSplit, tradeoff: DetectionTradeoff,
                             targets: TargetProbabilities) -> BoundResult:
    base = {"p": 0.5, "n_p": split.n_p, "n_d": split.n_d, "gamma_p": tradeoff.gamma,
            "emd_achieved": tradeoff.emd}
    budget = (targets.eie - tradeoff.emd) / (1.0 - tradeoff.emd)
    index, value = scan.best(budget)
    alpha_est, delta_est = scan.estimates(index)
    low, high = scan.interval(index, budget, budget)

    log2m, flags = finalize_log2m(value, split.n_d, integer=True)
    ci_low, ci_high = bracket(low, high, log2m, split.n_d)
    params = dict(base)
    params.update({"gamma2": float(scan.grid[index]), "delta2": delta_est.value,
                   "alpha2": alpha_est.value, "residual_budget": budget})
    return BoundResult(log2m, split.n, BoundKind.PREAMBLE_ACH, ci_low, ci_high, params, flags)


def _infeasible(split: PreambleSplit, tradeoff: DetectionTradeoff) -> BoundResult:
    flags = (BoundFlag.INFEASIBLE_DETECTION,)
    if tradeoff.degenerate:
        flags += (BoundFlag.DEGENERATE,)
    params = {"p": 0.5, "n_p": split.n_p, "n_d": split.n_d, "emd_achieved": tradeoff.emd}
    return BoundResult(0.0, split.n, BoundKind.PREAMBLE_ACH, 0.0, 0.0, params, flags)


def preamble_achievability(spec: ChannelSpec, split: PreambleSplit, targets: TargetProbabilities,
                           mc: Optional[MonteCarloConfig] = None) -> BoundResult:
    """
    Achievability with preamble detection and p = 1/2 random coding on n_d symbols.

    The detector runs exactly at efa; the data part gets the inclusive-error
    budget (eie - emd_achieved) / (1 - emd_achieved).
    """
    _check_split(spec, split)
    mc = _mc(mc)
    tradeoff = detection_tradeoff(split.n_p, spec.rho, targets.efa)
    if tradeoff.emd > targets.emd or tradeoff.emd >= targets.eie:
        logger.debug(f"Preamble n_p={split.n_p}: emd {tradeoff.emd:.3e} misses the targets")
        return _infeasible(split, tradeoff)

    result = _achievability_from_scan(_data_scan(spec.rho, split.n_d, mc), split, tradeoff, targets)
    logger.info(f"Preamble achievability n={split.n} n_p={split.n_p}: log2M={result.log2m:.3f}")
    return result


def preamble_converse(spec: ChannelSpec, split: PreambleSplit, eie: float,
                      mc: Optional[MonteCarloConfig] = None) -> BoundResult:
    """Metaconverse on the n_d data symbols, rate measured over the full n."""
    _check_split(spec, split)
    result = metaconverse_block(spec.rho, split.n_d, eie, _mc(mc), BoundKind.PREAMBLE_CONV, split.n)
    logger.info(f"Preamble converse n={split.n} n_p={split.n_p}: log2M={result.log2m:.3f}")
    return result.with_params(n_p=split.n_p, n_d=split.n_d)


def optimize_np(n: int, rho: float, targets: TargetProbabilities,
                mc: Optional[MonteCarloConfig] = None) -> Tuple[Optional[int], BoundResult]:
    """
    Maximize the preamble achievability bound over the preamble length.

    The scan runs upward from the shortest preamble meeting emd over every
    integer n_p. With mc.prune_np_scan set it may stop early, once the best
    value found is at least the n_d-symbol bound with the whole eie budget;
    the stop assumes the estimates are monotone in n_d.

    Returns:
        (n_p_star, result); n_p_star is None when no preamble length meets emd
    """
    if int(n) != n or n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    mc = _mc(mc)
    n_p_min = minimum_preamble_length(n, rho, targets)
    if n_p_min is None:
        logger.warning(f"No preamble length below n={n} meets emd={targets.emd}")
        return None, BoundResult.zero(BoundKind.PREAMBLE_ACH, n, BoundFlag.INFEASIBLE_DETECTION, p=0.5)

    best: Optional[BoundResult] = None
    for n_p in range(n_p_min, n):
        split = PreambleSplit.from_total(n, n_p)
        tradeoff = detection_tradeoff(n_p, rho, targets.efa)
        if tradeoff.emd >= targets.eie:
            continue
        scan = _data_scan(rho, split.n_d, mc)
        result = _achievability_from_scan(scan, split, tradeoff, targets)
        logger.debug(f"n_p={n_p}: log2M={result.log2m:.4f}")
        if best is None or result.log2m > best.log2m:
            best = result

        if mc.prune_np_scan and best is not None:
            _, optimistic = scan.best(targets.eie)
            if best.log2m >= min(finalize_log2m(optimistic, split.n_d, integer=True)[0], split.n_d):
                break

    if best is None:
        return None, BoundResult.zero(BoundKind.PREAMBLE_ACH, n, BoundFlag.INFEASIBLE_DETECTION, p=0.5)
    n_p_star = best.params["n_p"]
    logger.info(f"Optimized preamble n={n}: n_p*={n_p_star} log2M={best.log2m:.3f}")
    return n_p_star, best.with_params(n_p_star=n_p_star)
