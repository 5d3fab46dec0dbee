"""
Numerical evaluation of the Neyman-Pearson alpha and beta functions.

For a pair of measures (P, Q) whose optimal test thresholds the scalar
log-likelihood ratio L = log dP/dQ:

    beta_a(P, Q)  = min Q[Z=1]  subject to P[Z=1] >= a
    alpha_b(P, Q) = min P[Z=0]  subject to Q[Z=1] <= b

Both are evaluated from Monte-Carlo samples of L. Each probability is taken
either from samples of its own measure, or through the change of measure
Q[A] = E_P[exp(-L) 1_A] (and P[A] = E_Q[exp(L) 1_A]). Moderate tails
(at least moderate_tail_factor / sqrt(N)) always use their own samples;
thinner tails use whichever side carries the larger Kish effective sample
size, i.e. the smaller estimated relative error. Tail sums are accumulated
in the log domain.
"""

import logging
import math
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from src.config.settings import MonteCarloConfig, settings
from src.stats.samples import LlrSampleSet, ProbEstimate, SampleSide, TestPoint
from src.utils.errors import DomainError, PrecisionError

logger = logging.getLogger(__name__)

NEG_INF = -np.inf


def q_function(x):
    """Gaussian tail probability Q(x) = P[N(0,1) > x]."""
    return norm.sf(x)


def q_inverse(p):
    """Inverse of the Gaussian tail probability."""
    return norm.isf(p)


class TailCurve(NamedTuple):
    """Log-domain first and second moment sums of a weighted tail indicator."""

    log_sum: np.ndarray
    log_sq_sum: np.ndarray
    n: np.ndarray

    @property
    def log_prob(self) -> np.ndarray:
        return self.log_sum - np.log(self.n)

    @property
    def log_ess(self) -> np.ndarray:
        """Log of the Kish effective sample size of the tail sum."""
        with np.errstate(invalid="ignore"):
            out = 2.0 * self.log_sum - self.log_sq_sum
        return np.where(np.isneginf(self.log_sum), NEG_INF, out)


class WeightedEmpirical:
    """
    Weighted empirical law of an LLR sample set.

    Atoms are the distinct sample values; each atom carries the log of the
    sum of its sample weights (and of the squared weights, for intervals).
    Probabilities are these sums divided by the number of samples.
    """

    def __init__(self, values: np.ndarray, log_weights: np.ndarray, source: str):
        self.n = int(values.size)
        self.source = source
        if self.n == 0:
            raise DomainError("cannot build an empirical law from zero samples")

        order = np.argsort(values, kind="stable")
        sorted_values = values[order]
        sorted_lw = log_weights[order]

        self.atoms, starts = np.unique(sorted_values, return_index=True)
        self.log_mass = np.logaddexp.reduceat(sorted_lw, starts)
        self.log_mass_sq = np.logaddexp.reduceat(2.0 * sorted_lw, starts)

        # inclusive cumulative sums; padded so an insertion index maps directly
        upper = np.logaddexp.accumulate(self.log_mass[::-1])[::-1]
        upper_sq = np.logaddexp.accumulate(self.log_mass_sq[::-1])[::-1]
        lower = np.logaddexp.accumulate(self.log_mass)
        lower_sq = np.logaddexp.accumulate(self.log_mass_sq)
        self._upper = np.append(upper, NEG_INF)
        self._upper_sq = np.append(upper_sq, NEG_INF)
        self._lower = np.insert(lower, 0, NEG_INF)
        self._lower_sq = np.insert(lower_sq, 0, NEG_INF)

    @property
    def log_total(self) -> float:
        return float(self._upper[0])

    def _atom_index(self, gammas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        k = np.searchsorted(self.atoms, gammas, side="left")
        hit = np.zeros(np.shape(gammas), dtype=bool)
        inside = k < self.atoms.size
        hit[inside] = self.atoms[k[inside]] == np.asarray(gammas)[inside]
        return k, hit

    def upper(self, gammas, tau=0.0) -> TailCurve:
        """Weighted mass of {L > gamma} plus tau times the atom at gamma."""
        gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
        k = np.searchsorted(self.atoms, gammas, side="right")
        log_sum = self._upper[k]
        log_sq = self._upper_sq[k]
        log_sum, log_sq = self._add_atom(gammas, log_sum, log_sq, tau)
        return TailCurve(log_sum, log_sq, np.full(gammas.shape, float(self.n)))

    def lower(self, gammas, tau=0.0) -> TailCurve:
        """Weighted mass of {L < gamma} plus (1 - tau) times the atom at gamma."""
        gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
        k = np.searchsorted(self.atoms, gammas, side="left")
        log_sum = self._lower[k]
        log_sq = self._lower_sq[k]
        log_sum, log_sq = self._add_atom(gammas, log_sum, log_sq, 1.0 - np.asarray(tau, dtype=float))
        return TailCurve(log_sum, log_sq, np.full(gammas.shape, float(self.n)))

    def _add_atom(self, gammas, log_sum, log_sq, share):
        share = np.broadcast_to(np.asarray(share, dtype=float), gammas.shape)
        k, hit = self._atom_index(gammas)
        if not np.any(hit & (share > 0)):
            return log_sum, log_sq
        with np.errstate(divide="ignore"):
            log_share = np.log(share)
        atom = np.where(hit, self.log_mass[np.minimum(k, self.atoms.size - 1)], NEG_INF)
        atom_sq = np.where(hit, self.log_mass_sq[np.minimum(k, self.atoms.size - 1)], NEG_INF)
        # randomized indicator: E[(wZ)^2] = share * w^2
        return (np.logaddexp(log_sum, log_share + atom),
                np.logaddexp(log_sq, log_share + atom_sq))

    def solve_upper(self, log_target: float) -> TestPoint:
        """Test point whose randomized upper mass equals exp(log_target)."""
        log_target = log_target + math.log(self.n)
        inclusive = self._upper[:-1]
        count = int(np.searchsorted(-inclusive, -log_target, side="right"))
        if count == 0:
            return TestPoint(threshold=-math.inf, tau=1.0)
        j = count - 1
        strict = self._upper[j + 1]
        mass = self.log_mass[j]
        tau = math.exp(log_target - mass) - math.exp(strict - mass)
        return TestPoint(threshold=float(self.atoms[j]), tau=float(np.clip(tau, 0.0, 1.0)))

    def solve_lower(self, log_target: float) -> TestPoint:
        """Test point whose randomized lower (Z=0) mass equals exp(log_target)."""
        log_target = log_target + math.log(self.n)
        inclusive = self._lower[1:]
        j = int(np.searchsorted(inclusive, log_target, side="left"))
        if j >= self.atoms.size:
            return TestPoint(threshold=math.inf, tau=0.0)
        strict = self._lower[j]
        mass = self.log_mass[j]
        keep = math.exp(log_target - mass) - math.exp(strict - mass)
        return TestPoint(threshold=float(self.atoms[j]), tau=float(np.clip(1.0 - keep, 0.0, 1.0)))


def curve_interval(curve: TailCurve, z: float) -> Tuple[np.ndarray, np.ndarray]:
    """Log-domain normal confidence bounds for every element of a tail curve."""
    empty = np.isneginf(curve.log_sum)
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        log_value = curve.log_sum - np.log(curve.n)
        rel_var = np.maximum(0.0, np.exp(curve.log_sq_sum - 2.0 * curve.log_sum) - 1.0 / curve.n)
        rel = z * np.sqrt(rel_var)
        log_high = log_value + np.log1p(rel)
        log_low = np.where(rel < 1.0, log_value + np.log(np.clip(1.0 - rel, 1e-300, None)), NEG_INF)
    return np.where(empty, NEG_INF, log_low), np.where(empty, NEG_INF, log_high)


def curve_to_estimate(curve: TailCurve, index: int, z: float, source: str) -> ProbEstimate:
    """Convert one element of a tail curve into a ProbEstimate with a normal CI."""
    log_sum = float(curve.log_sum[index])
    log_sq = float(curve.log_sq_sum[index])
    n = float(curve.n[index])
    if math.isinf(log_sum):
        return ProbEstimate(value=0.0, ci_low=0.0, ci_high=0.0, n_samples=int(n),
                            log_value=-math.inf, log_ci_low=-math.inf, log_ci_high=-math.inf,
                            effective_samples=0.0, source=source)

    log_value = log_sum - math.log(n)
    rel_var = max(0.0, math.exp(log_sq - 2.0 * log_sum) - 1.0 / n)
    rel = z * math.sqrt(rel_var)
    log_ci_high = log_value + math.log1p(rel)
    log_ci_low = log_value + math.log(1.0 - rel) if rel < 1.0 else -math.inf
    value = min(1.0, math.exp(log_value))
    ci_low = min(value, math.exp(log_ci_low)) if log_ci_low > -math.inf else 0.0
    ci_high = max(value, min(1.0, math.exp(log_ci_high)))
    return ProbEstimate(
        value=value,
        ci_low=ci_low,
        ci_high=ci_high,
        n_samples=int(n),
        log_value=log_value,
        log_ci_low=log_ci_low,
        log_ci_high=log_ci_high,
        effective_samples=math.exp(2.0 * log_sum - log_sq),
        source=source,
    )


class NeymanPearsonEstimator:
    """
    Tail-probability engine for one (P, Q) pair of LLR sample sets.

    Args:
        p_samples: Samples of L drawn under P (may be None)
        q_samples: Samples of L drawn under Q (may be None)
        mc: Monte-Carlo configuration (confidence level, ESS floor, tail rule)
    """

    def __init__(self, p_samples: Optional[LlrSampleSet] = None,
                 q_samples: Optional[LlrSampleSet] = None,
                 mc: Optional[MonteCarloConfig] = None):
        self.mc = mc or settings.get_mc_config()
        p_samples = None if p_samples is None or p_samples.is_empty() else p_samples
        q_samples = None if q_samples is None or q_samples.is_empty() else q_samples
        if p_samples is None and q_samples is None:
            raise DomainError("at least one nonempty sample set is required")
        if p_samples is not None and p_samples.drawn_under is not SampleSide.P:
            raise DomainError("p_samples must be drawn under P")
        if q_samples is not None and q_samples.drawn_under is not SampleSide.Q:
            raise DomainError("q_samples must be drawn under Q")

        self.identical = all(
            s is None or not np.any(s.values) for s in (p_samples, q_samples)
        )
        self.z = float(norm.ppf(0.5 + 0.5 * self.mc.confidence_level))

        self.p_native = self.q_cross = self.q_native = self.p_cross = None
        if p_samples is not None:
            v = p_samples.values
            self.p_native = WeightedEmpirical(v, np.zeros_like(v), "P-native")
            self.q_cross = WeightedEmpirical(v, -v, "Q-from-P")
        if q_samples is not None:
            v = q_samples.values
            self.q_native = WeightedEmpirical(v, np.zeros_like(v), "Q-native")
            self.p_cross = WeightedEmpirical(v, v.copy(), "P-from-Q")

    def _log_moderate(self, n: int) -> float:
        return math.log(self.mc.moderate_tail_factor) - 0.5 * math.log(n)

    def _prefer_native(self, native_curve: TailCurve, cross_curve: TailCurve, n: int) -> np.ndarray:
        # a cross-side sum that never reaches the tail's mass shows up as a low ESS
        moderate = native_curve.log_prob >= self._log_moderate(n)
        return moderate | (native_curve.log_ess >= cross_curve.log_ess)

    def _select(self, native: Optional[WeightedEmpirical], cross: Optional[WeightedEmpirical],
                gammas, tau, tail: str) -> Tuple[TailCurve, np.ndarray]:
        """Evaluate a tail on both sides; keep, per element, the side with the smaller relative error."""
        method = "upper" if tail == "upper" else "lower"
        if cross is None:
            curve = getattr(native, method)(gammas, tau)
            return curve, np.ones(curve.log_sum.shape, dtype=bool)
        cross_curve = getattr(cross, method)(gammas, tau)
        if native is None:
            return cross_curve, np.zeros(cross_curve.log_sum.shape, dtype=bool)
        native_curve = getattr(native, method)(gammas, tau)
        use_native = self._prefer_native(native_curve, cross_curve, native.n)
        curve = TailCurve(
            np.where(use_native, native_curve.log_sum, cross_curve.log_sum),
            np.where(use_native, native_curve.log_sq_sum, cross_curve.log_sq_sum),
            np.where(use_native, native_curve.n, cross_curve.n),
        )
        return curve, use_native

    def q_upper_curve(self, gammas, tau=0.0) -> TailCurve:
        """Q[Z=1] over a threshold grid."""
        return self._select(self.q_native, self.q_cross, gammas, tau, "upper")[0]

    def p_lower_curve(self, gammas, tau=0.0) -> TailCurve:
        """P[Z=0] over a threshold grid."""
        return self._select(self.p_native, self.p_cross, gammas, tau, "lower")[0]

    def q_upper_at(self, point: TestPoint) -> ProbEstimate:
        curve, native = self._select(self.q_native, self.q_cross, [point.threshold], point.tau, "upper")
        return curve_to_estimate(curve, 0, self.z, "Q-native" if native[0] else "Q-from-P")

    def p_lower_at(self, point: TestPoint) -> ProbEstimate:
        curve, native = self._select(self.p_native, self.p_cross, [point.threshold], point.tau, "lower")
        return curve_to_estimate(curve, 0, self.z, "P-native" if native[0] else "P-from-Q")

    def threshold_grid(self) -> np.ndarray:
        """Distinct LLR values seen on either side, ascending."""
        parts = [e.atoms for e in (self.p_native, self.q_native) if e is not None]
        return np.unique(np.concatenate(parts))

    def _solve(self, native: Optional[WeightedEmpirical], cross: Optional[WeightedEmpirical],
               log_target: float, tail: str) -> TestPoint:
        """Solve for a tail level on each side and keep the better-sampled solution."""
        solver = "solve_upper" if tail == "upper" else "solve_lower"
        if cross is None:
            return getattr(native, solver)(log_target)
        cross_point = getattr(cross, solver)(log_target)
        if native is None:
            return cross_point
        native_point = getattr(native, solver)(log_target)
        native_curve = getattr(native, tail)([native_point.threshold], native_point.tau)
        cross_curve = getattr(cross, tail)([cross_point.threshold], cross_point.tau)
        if self._prefer_native(native_curve, cross_curve, native.n)[0]:
            return native_point
        return cross_point

    def solve_q_upper(self, beta: float) -> TestPoint:
        """Test point with Q[Z=1] = beta."""
        return self._solve(self.q_native, self.q_cross, math.log(beta), "upper")

    def solve_p_lower(self, miss: float) -> TestPoint:
        """Test point with P[Z=0] = miss."""
        return self._solve(self.p_native, self.p_cross, math.log(miss), "lower")

    def check_precision(self, estimate: ProbEstimate, what: str) -> ProbEstimate:
        """Raise PrecisionError when the Kish ESS behind an estimate is below the floor."""
        if estimate.n_samples and estimate.effective_samples < self.mc.min_effective_samples:
            message = (
                f"{what}: effective sample size {estimate.effective_samples:.1f} below floor "
                f"{self.mc.min_effective_samples}; attained CI "
                f"[{estimate.ci_low:.3e}, {estimate.ci_high:.3e}]"
            )
            logger.error(message)
            raise PrecisionError(message, estimate)
        return estimate

    def alpha(self, beta: float) -> Tuple[ProbEstimate, TestPoint]:
        """alpha_beta(P, Q): smallest P[Z=0] subject to Q[Z=1] <= beta."""
        if not 0.0 < beta <= 1.0:
            raise DomainError(f"beta must lie in (0,1], got {beta}")
        if beta >= 1.0:
            return ProbEstimate.exact(0.0), TestPoint(threshold=-math.inf, tau=1.0)
        if self.identical:
            return ProbEstimate.exact(1.0 - beta), TestPoint(threshold=0.0, tau=beta)

        point = self.solve_q_upper(beta)
        estimate = self.p_lower_at(point)
        logger.debug(f"alpha({beta:.3e}) = {estimate.value:.4e} at gamma={point.threshold:.4f}")
        return self.check_precision(estimate, f"alpha at beta={beta:.3e}"), point

    def beta(self, alpha: float) -> Tuple[ProbEstimate, TestPoint]:
        """beta_alpha(P, Q): smallest Q[Z=1] subject to P[Z=1] >= alpha."""
        if not 0.0 <= alpha < 1.0:
            raise DomainError(f"alpha must lie in [0,1), got {alpha}")
        if alpha <= 0.0:
            return ProbEstimate.exact(0.0), TestPoint(threshold=math.inf, tau=0.0)
        if self.identical:
            return ProbEstimate.exact(alpha), TestPoint(threshold=0.0, tau=alpha)

        point = self.solve_p_lower(1.0 - alpha)
        estimate = self.q_upper_at(point)
        logger.debug(f"beta({alpha:.6f}) = {estimate.value:.4e} at gamma={point.threshold:.4f}")
        return self.check_precision(estimate, f"beta at alpha={alpha:.6f}"), point


def alpha_from_samples(p_samples: Optional[LlrSampleSet], q_samples: Optional[LlrSampleSet],
                       beta: float, mc: Optional[MonteCarloConfig] = None) -> Tuple[ProbEstimate, TestPoint]:
    """
    Estimate alpha_beta(P, Q) from LLR samples.

    Args:
        p_samples: Samples of log dP/dQ drawn under P
        q_samples: Samples of log dP/dQ drawn under Q
        beta: Upper limit on Q[Z=1], in (0,1]
        mc: Monte-Carlo configuration

    Returns:
        The estimate of P[Z=0] and the test achieving it
    """
    return NeymanPearsonEstimator(p_samples, q_samples, mc).alpha(beta)


def beta_from_samples(p_samples: Optional[LlrSampleSet], q_samples: Optional[LlrSampleSet],
                      alpha: float, mc: Optional[MonteCarloConfig] = None) -> Tuple[ProbEstimate, TestPoint]:
    """
    Estimate beta_alpha(P, Q) from LLR samples.

    Args:
        p_samples: Samples of log dP/dQ drawn under P
        q_samples: Samples of log dP/dQ drawn under Q
        alpha: Lower limit on P[Z=1], in [0,1)
        mc: Monte-Carlo configuration

    Returns:
        The estimate of Q[Z=1] and the test achieving it
    """
    return NeymanPearsonEstimator(p_samples, q_samples, mc).beta(alpha)


def _gaussian_sigma(variance: float) -> float:
    if not variance > 0:
        raise DomainError(f"variance must be positive, got {variance}")
    return math.sqrt(variance)


def gaussian_alpha(mean_p: float, mean_q: float, variance: float, beta: float) -> float:
    """alpha_beta when L ~ N(mean_p, variance) under P and N(mean_q, variance) under Q."""
    sigma = _gaussian_sigma(variance)
    if beta <= 0.0:
        return 1.0
    if beta >= 1.0:
        return 0.0
    gamma = mean_q + sigma * q_inverse(beta)
    return float(norm.cdf((gamma - mean_p) / sigma))


def gaussian_beta(mean_p: float, mean_q: float, variance: float, alpha: float) -> float:
    """beta_alpha when L ~ N(mean_p, variance) under P and N(mean_q, variance) under Q."""
    sigma = _gaussian_sigma(variance)
    if alpha <= 0.0:
        return 0.0
    if alpha >= 1.0:
        return 1.0
    gamma = mean_p + sigma * q_inverse(alpha)
    return float(q_function((gamma - mean_q) / sigma))


def weight_normalization(samples: LlrSampleSet, confidence_level: float = 0.99) -> Tuple[float, float, float]:
    """
    Mean of the change-of-measure weights of a sample set, with a normal CI.

    For samples under P the weights are exp(-L), for samples under Q exp(L);
    either way the mean estimates the total mass of the other measure (one).

    Returns:
        (mean, ci_low, ci_high)
    """
    sign = -1.0 if samples.drawn_under is SampleSide.P else 1.0
    log_w = sign * samples.values
    n = samples.count
    log_mean = float(logsumexp(log_w)) - math.log(n)
    log_second = float(logsumexp(2.0 * log_w)) - math.log(n)
    variance = max(0.0, math.exp(log_second) - math.exp(2.0 * log_mean)) / n
    z = float(norm.ppf(0.5 + 0.5 * confidence_level))
    mean = math.exp(log_mean)
    half = z * math.sqrt(variance)
    return mean, mean - half, mean + half
