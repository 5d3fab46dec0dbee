"""
Rate bounds for joint packet detection and decoding over the bi-AWGN channel.

All four bounds use the capacity-style auxiliary output law Q_Y = P_Y, so the
"same-measure" alpha terms collapse to closed forms:
    1 - alpha_b(P_Y, P_Y) = min(1, b)
    beta_a(P_Y, P_Y)      = a
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from src.bounds.results import BoundFlag, BoundKind, BoundResult, TargetProbabilities
from src.channel.biawgn import ChannelSpec, Measure, Statistic, sample_llr
from src.config.settings import MonteCarloConfig, settings
from src.stats.neyman_pearson import NeymanPearsonEstimator, curve_interval, curve_to_estimate
from src.stats.samples import ProbEstimate
from src.utils.errors import DomainError, PrecisionError

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

# Largest log2(M) for which M is floored to an integer; beyond it the float
# spacing exceeds one.
_INTEGER_M_LIMIT = 52.0

# Margin by which a sub-floor threshold must beat the usable ones to count
# as cut off.
_CUTOFF_TOLERANCE_BITS = 0.01


def _mc(mc: Optional[MonteCarloConfig]) -> MonteCarloConfig:
    return mc or settings.get_mc_config()


def _log1m(x: float) -> float:
    return math.log1p(-x) if x < 1.0 else -math.inf


def _log2_one_plus(log_x):
    """log2(1 + exp(log_x)), elementwise."""
    return np.logaddexp(0.0, log_x) / LN2


def finalize_log2m(value: float, cap: float, integer: bool) -> Tuple[float, Tuple[BoundFlag, ...]]:
    """Clamp a log2(M) value to [0, cap]; optionally floor M to an integer."""
    if not value > 0.0:
        return 0.0, ()
    if value >= cap:
        return float(cap), (BoundFlag.CAPPED,)
    if integer and value < _INTEGER_M_LIMIT:
        m = math.floor(2.0 ** value + 1e-9)
        return math.log2(max(1, m)), ()
    return float(value), ()


def bracket(low: float, high: float, value: float, cap: float) -> Tuple[float, float]:
    """Confidence endpoints clipped to [0, cap] and widened to contain value."""
    low = 0.0 if math.isnan(low) else min(max(low, 0.0), value)
    high = cap if math.isnan(high) else max(min(high, cap), value)
    return float(low), float(high)


def detection_samples(spec: ChannelSpec, mc: MonteCarloConfig):
    """Samples of r under P_Y and under the idle (noise-only) output law."""
    r_p = sample_llr(spec, Statistic.R, Measure.OUTPUT_PY, mc.samples, mc.seed, mc.threads)
    r_q = sample_llr(spec, Statistic.R, Measure.NOISE_ONLY, mc.samples, mc.seed, mc.threads)
    return r_p, r_q


def information_estimator(spec: ChannelSpec, mc: MonteCarloConfig) -> NeymanPearsonEstimator:
    """Estimator for (P_X P_{Y|X}, P_X P_Y) driven by the information density."""
    i_p = sample_llr(spec, Statistic.I, Measure.JOINT_PXY, mc.samples, mc.seed, mc.threads)
    i_q = sample_llr(spec, Statistic.I, Measure.PRODUCT_PXQY, mc.samples, mc.seed, mc.threads)
    return NeymanPearsonEstimator(i_p, i_q, mc)


def conditional_estimator(spec: ChannelSpec, mc: MonteCarloConfig) -> NeymanPearsonEstimator:
    """Estimator for (P_{Y|X=x}, Q_Y) with x the all-(+sqrt(rho)) codeword."""
    i_p = sample_llr(spec, Statistic.I, Measure.CONDITIONAL_PYX, mc.samples, mc.seed, mc.threads)
    i_q = sample_llr(spec, Statistic.I, Measure.OUTPUT_PY, mc.samples, mc.seed, mc.threads)
    return NeymanPearsonEstimator(i_p, i_q, mc)


class DecodingScan:
    """
    Threshold scan over the information density for random-coding achievability.

    For every candidate threshold gamma the scan holds
        alpha(gamma) = P_XY[i <= gamma]      (missed correct codeword)
        delta(gamma) = P_X P_Y[i > gamma]    (pairwise confusion)
    with gamma = -inf prepended, where alpha = 0 and delta = 1.
    A candidate is usable when the effective sample sizes behind both alpha
    and delta reach the configured floor.
    """

    def __init__(self, estimator: NeymanPearsonEstimator):
        self.estimator = estimator
        self.grid = np.concatenate(([-np.inf], estimator.threshold_grid()))
        self.alpha_curve = estimator.p_lower_curve(self.grid)
        self.delta_curve = estimator.q_upper_curve(self.grid)
        self.log_alpha = self.alpha_curve.log_prob
        self.log_delta = self.delta_curve.log_prob

        floor = math.log(estimator.mc.min_effective_samples)
        self.usable = (np.isfinite(self.log_delta)
                       & (self.delta_curve.log_ess >= floor)
                       & (self.alpha_curve.log_ess >= floor))
        self.usable[0] = True

    def log2m_curve(self, budget: float, log_alpha=None, log_delta=None) -> np.ndarray:
        """
        Largest log2(M) per threshold with alpha + (M-1) delta / 2 <= budget.

        Entries where the budget is exhausted are -inf.
        """
        log_alpha = self.log_alpha if log_alpha is None else log_alpha
        log_delta = self.log_delta if log_delta is None else log_delta
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            slack = budget - np.exp(log_alpha)
            log_m1 = np.log(2.0 * np.clip(slack, 0.0, None)) - log_delta
            out = _log2_one_plus(log_m1)
        return np.where((slack > 0.0) & np.isfinite(log_delta), out, -np.inf)

    def best(self, budget: float) -> Tuple[int, float]:
        """
        Index of the maximizing threshold and its (continuous) log2(M).

        Raises:
            PrecisionError: if a threshold below the effective-sample floor
                would beat every usable one
        """
        raw = self.log2m_curve(budget)
        values = np.where(self.usable, raw, -np.inf)
        index = int(np.argmax(values))
        top = int(np.argmax(raw))
        if raw[top] > values[index] + _CUTOFF_TOLERANCE_BITS:
            alpha, delta = self.estimates(top)
            weakest = min((alpha, delta), key=lambda e: e.effective_samples)
            message = (
                f"decoding threshold {self.grid[top]:.4f} maximizes log2M "
                f"({raw[top]:.3f} vs {values[index]:.3f} usable) but its tails hold "
                f"{weakest.effective_samples:.1f} effective samples; attained CI "
                f"[{weakest.ci_low:.3e}, {weakest.ci_high:.3e}]"
            )
            logger.error(message)
            raise PrecisionError(message, weakest)
        return index, float(values[index])

    def estimates(self, index: int) -> Tuple[ProbEstimate, ProbEstimate]:
        """(alpha, delta) estimates at one scan index."""
        if index == 0:
            return ProbEstimate.exact(0.0), ProbEstimate.exact(1.0)
        z = self.estimator.z
        alpha = curve_to_estimate(self.alpha_curve, index, z, "alpha")
        delta = curve_to_estimate(self.delta_curve, index, z, "delta")
        return alpha, delta

    def interval(self, index: int, budget_low: float, budget_high: float) -> Tuple[float, float]:
        """log2(M) at the pessimistic and optimistic ends of the estimator CIs."""
        alpha, delta = self.estimates(index)
        low = self.log2m_curve(budget_low, np.array([alpha.log_ci_high]), np.array([delta.log_ci_high]))
        high = self.log2m_curve(budget_high, np.array([alpha.log_ci_low]), np.array([delta.log_ci_low]))
        high_value = float(high[0])
        if math.isinf(delta.log_ci_low) and budget_high > alpha.ci_low:
            high_value = math.inf
        return float(low[0]), high_value

    def ie_rhs(self, m: int) -> Tuple[int, float]:
        """Threshold minimizing alpha + min(1, (M-1) delta / 2) for a fixed M."""
        with np.errstate(over="ignore"):
            union = np.minimum(1.0, 0.5 * (m - 1) * np.exp(self.log_delta))
        rhs = np.where(self.usable, union + np.exp(self.log_alpha), np.inf)
        index = int(np.argmin(rhs))
        return index, float(rhs[index])


def joint_achievability(spec: ChannelSpec, targets: TargetProbabilities,
                        mc: Optional[MonteCarloConfig] = None) -> BoundResult:
    """
    Random-coding achievability bound with joint detection and decoding.

    The detection test saturates the false-alarm target (delta1 = efa); the
    misdetection term A = alpha_efa(P_Y, P_{Y|idle}) is estimated from r.
    The remaining inclusive-error budget eie - A is spent on
    alpha_delta2(P_XY, P_X P_Y) + (M-1) delta2 / 2, maximized over the
    information-density threshold that parametrizes delta2.

    Args:
        spec: Channel and input law
        targets: (efa, emd, eie) constraint triple
        mc: Monte-Carlo configuration

    Returns:
        BoundResult of kind JOINT_ACH (zero with INFEASIBLE_DETECTION when the
        detection term alone violates emd or eie)
    """
    mc = _mc(mc)
    r_p, r_q = detection_samples(spec, mc)
    detection = NeymanPearsonEstimator(r_p, r_q, mc)
    a_est, point1 = detection.alpha(targets.efa)

    base = {"p": spec.p, "delta1": targets.efa, "gamma1": point1.threshold,
            "tau1": point1.tau, "detection_alpha": a_est.value}
    if a_est.value > targets.emd or a_est.value >= targets.eie:
        logger.warning(f"Joint achievability n={spec.n} p={spec.p}: detection term "
                       f"{a_est.value:.3e} exceeds the MD or IE target")
        return BoundResult.zero(BoundKind.JOINT_ACH, spec.n, BoundFlag.INFEASIBLE_DETECTION, **base)

    scan = DecodingScan(information_estimator(spec, mc))
    budget = targets.eie - a_est.value
    index, value = scan.best(budget)
    alpha_est, delta_est = scan.estimates(index)
    low, high = scan.interval(index, targets.eie - a_est.ci_high, targets.eie - a_est.ci_low)

    log2m, flags = finalize_log2m(value, spec.n, integer=True)
    ci_low, ci_high = bracket(low, high, log2m, spec.n)
    params = dict(base)
    params.update({
        "gamma2": float(scan.grid[index]),
        "delta2": delta_est.value,
        "log_delta2": delta_est.log_value,
        "alpha2": alpha_est.value,
        "residual_budget": budget,
        # side constraint of the joint bound: M <= 2 / delta2 + 1
        "log2m_limit": float(_log2_one_plus(math.log(2.0) - delta_est.log_value)),
    })
    logger.info(f"Joint achievability n={spec.n} rho={spec.rho:.4g} p={spec.p:.3f}: "
                f"log2M={log2m:.3f} rate={log2m / spec.n:.4f}")
    return BoundResult(log2m, spec.n, BoundKind.JOINT_ACH, ci_low, ci_high, params, flags)


def ensemble_converse(spec: ChannelSpec, targets: TargetProbabilities,
                      mc: Optional[MonteCarloConfig] = None) -> BoundResult:
    """
    Converse for codes whose ensemble-averaged errors meet the targets, at the
    input law of spec: log2((1 - B) / D) when B <= emd, else zero.

    B = beta_{1-efa}(P_{Y|idle}, P_Y) and D = beta_{1-eie}(P_XY, P_X P_Y).
    """
    mc = _mc(mc)
    r_p, r_q = detection_samples(spec, mc)
    idle = NeymanPearsonEstimator(r_q.negated(), r_p.negated(), mc)
    b_est, point_b = idle.beta(1.0 - targets.efa)

    base = {"p": spec.p, "detection_beta": b_est.value, "gamma1": point_b.threshold}
    if b_est.value > targets.emd:
        logger.warning(f"Ensemble converse n={spec.n} p={spec.p}: detection beta "
                       f"{b_est.value:.3e} exceeds emd, indicator is zero")
        return BoundResult.zero(BoundKind.ENSEMBLE_CONV, spec.n, BoundFlag.INDICATOR_VIOLATED, **base)

    d_est, point_d = information_estimator(spec, mc).beta(1.0 - targets.eie)
    value = (_log1m(b_est.value) - d_est.log_value) / LN2
    low = (_log1m(b_est.ci_high) - d_est.log_ci_high) / LN2
    high = (_log1m(b_est.ci_low) - d_est.log_ci_low) / LN2

    log2m, flags = finalize_log2m(value, spec.n, integer=False)
    ci_low, ci_high = bracket(low, high, log2m, spec.n)
    params = dict(base)
    params.update({"decoding_beta": d_est.value, "log_decoding_beta": d_est.log_value,
                   "gamma": point_d.threshold, "tau": point_d.tau})
    logger.info(f"Ensemble converse n={spec.n} p={spec.p:.3f}: log2M={log2m:.3f}")
    return BoundResult(log2m, spec.n, BoundKind.ENSEMBLE_CONV, ci_low, ci_high, params, flags)


def metaconverse_block(rho: float, n_block: int, eie: float, mc: MonteCarloConfig,
                       kind: BoundKind, n_total: int) -> BoundResult:
    """-log2 beta_{1-eie}(P_{Y|X=x}, Q_Y) on an n_block-symbol block, p = 1/2."""
    if not 0.0 < eie:
        raise DomainError(f"eie must be positive, got {eie}")
    block = ChannelSpec(rho=rho, p=0.5, n=n_block)
    if eie >= 1.0:
        return BoundResult(float(n_block), n_total, kind, float(n_block), float(n_block),
                           {"p": 0.5, "n_block": n_block}, (BoundFlag.CAPPED,))

    b_est, point = conditional_estimator(block, mc).beta(1.0 - eie)
    value = -b_est.log_value / LN2
    log2m, flags = finalize_log2m(value, n_block, integer=False)
    ci_low, ci_high = bracket(-b_est.log_ci_high / LN2, -b_est.log_ci_low / LN2, log2m, n_block)
    params = {"p": 0.5, "n_block": n_block, "beta": b_est.value, "log_beta": b_est.log_value,
              "gamma": point.threshold, "tau": point.tau}
    return BoundResult(log2m, n_total, kind, ci_low, ci_high, params, flags)


def metaconverse(spec: ChannelSpec, eie: float, mc: Optional[MonteCarloConfig] = None) -> BoundResult:
    """
    Metaconverse bound -log2 beta_{1-eie}(P_{Y|X=x}, Q_Y).

    The input law is forced to p = 1/2 whatever spec.p says; x is the
    all-(+sqrt(rho)) codeword. Capped at n bits.
    """
    result = metaconverse_block(spec.rho, spec.n, eie, _mc(mc), BoundKind.METACONVERSE, spec.n)
    logger.info(f"Metaconverse n={spec.n} rho={spec.rho:.4g}: log2M={result.log2m:.3f}")
    return result


def _solve_dependence_testing(grid: np.ndarray, log_a: np.ndarray, log_c: np.ndarray,
                              eie: float) -> Tuple[float, int]:
    """
    Largest g with P[i <= g] + e^g Q[i > g] <= eie.

    Between consecutive atoms both tail probabilities are constant, so the
    equation is solved in closed form inside the last admissible interval.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        f = np.exp(log_a) + np.exp(grid + log_c)
    over = f > eie
    k = int(np.argmax(over)) - 1 if over.any() else grid.size - 1
    k = max(k, 0)

    a = math.exp(log_a[k])
    if math.isinf(log_c[k]) or eie <= a:
        g = math.inf if eie > a else grid[k]
    else:
        g = math.log(eie - a) - float(log_c[k])
    g = max(g, float(grid[k]))
    if k + 1 < grid.size:
        g = min(g, float(grid[k + 1]))
    return g, k


def dt_genie(spec: ChannelSpec, eie: float, mc: Optional[MonteCarloConfig] = None) -> BoundResult:
    """
    Dependence-testing achievability with genie-aided detection.

    Finds the largest M with E[exp(-max(0, i - log((M-1)/2)))] <= eie, using
    the input law of spec (the sweep evaluates it at p = 1/2).
    """
    mc = _mc(mc)
    if not 0.0 < eie:
        raise DomainError(f"eie must be positive, got {eie}")
    if eie >= 1.0:
        return BoundResult(float(spec.n), spec.n, BoundKind.DT_GENIE, float(spec.n), float(spec.n),
                           {"p": spec.p}, (BoundFlag.CAPPED,))

    estimator = information_estimator(spec, mc)
    grid = np.concatenate(([-np.inf], estimator.threshold_grid()))
    lower = estimator.p_lower_curve(grid)
    upper = estimator.q_upper_curve(grid)

    g, k = _solve_dependence_testing(grid, lower.log_prob, upper.log_prob, eie)
    if k > 0:
        for curve, name in ((lower, "P-tail"), (upper, "Q-tail")):
            if np.isfinite(curve.log_sum[k]):
                estimator.check_precision(curve_to_estimate(curve, k, estimator.z, name),
                                          f"dependence-testing {name} at gamma={grid[k]:.4f}")

    lower_lo, lower_hi = curve_interval(lower, estimator.z)
    upper_lo, upper_hi = curve_interval(upper, estimator.z)
    g_low, _ = _solve_dependence_testing(grid, lower_hi, upper_hi, eie)
    g_high, _ = _solve_dependence_testing(grid, lower_lo, upper_lo, eie)

    def to_log2m(threshold: float) -> float:
        return float(_log2_one_plus(LN2 + threshold))

    log2m, flags = finalize_log2m(to_log2m(g), spec.n, integer=True)
    ci_low, ci_high = bracket(to_log2m(g_low), to_log2m(g_high), log2m, spec.n)
    logger.info(f"DT bound n={spec.n} p={spec.p:.3f}: log2M={log2m:.3f}")
    return BoundResult(log2m, spec.n, BoundKind.DT_GENIE, ci_low, ci_high,
                       {"p": spec.p, "gamma": g}, flags)


def optimize_p(n: int, rho: float, targets: TargetProbabilities, p_grid: Sequence[float],
               mc: Optional[MonteCarloConfig] = None,
               bound: Optional[Callable[..., BoundResult]] = None) -> Tuple[float, BoundResult]:
    """
    Maximize a bound over the input skew p.

    Every grid point uses the same seed; since inputs are generated from
    uniforms compared against p, the sample sets share their randomness.

    Args:
        n: Blocklength
        rho: Linear SNR
        targets: Constraint triple
        p_grid: Candidate p values in [1/2, 1]
        mc: Monte-Carlo configuration
        bound: Bound evaluated at each p (joint_achievability by default)

    Returns:
        (p_star, result) with ties resolved toward p = 1/2
    """
    if p_grid is None or len(p_grid) == 0:
        raise DomainError("p_grid must not be empty")
    mc = _mc(mc)
    bound = bound or joint_achievability

    best, best_p = None, None
    for p in sorted({float(x) for x in p_grid}):
        result = bound(ChannelSpec(rho=rho, p=p, n=n), targets, mc)
        logger.debug(f"p={p:.4f}: log2M={result.log2m:.4f}")
        if best is None or result.log2m > best.log2m:
            best, best_p = result, p
    return best_p, best.with_params(p_star=best_p)


@dataclass(frozen=True)
class OperatingPoint:
    """
    Decoder thresholds and the matching right-hand sides for a fixed M.

    rhs_fa, rhs_md and rhs_ie are the false-alarm, misdetection and
    inclusive-error guarantees averaged over the random codebook ensemble.
    """

    m: int
    delta1: float
    gamma1: float
    tau1: float
    gamma2: float
    tau2: float
    delta2: ProbEstimate
    alpha2: ProbEstimate
    rhs_fa: ProbEstimate
    rhs_md: ProbEstimate
    rhs_ie: ProbEstimate


def joint_operating_point(spec: ChannelSpec, targets: TargetProbabilities, m: int,
                             mc: Optional[MonteCarloConfig] = None) -> OperatingPoint:
    """Thresholds achieving the joint bound for codebook size m, gamma2 chosen to minimize the IE guarantee."""
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    mc = _mc(mc)
    r_p, r_q = detection_samples(spec, mc)
    detection = NeymanPearsonEstimator(r_p, r_q, mc)
    a_est, point1 = detection.alpha(targets.efa)
    fa_est = detection.q_upper_at(point1)

    scan = DecodingScan(information_estimator(spec, mc))
    index, _ = scan.ie_rhs(int(m))
    alpha_est, delta_est = scan.estimates(index)

    def ie(a: float, alpha: float, delta: float) -> float:
        return min(1.0, a + min(1.0, 0.5 * (m - 1) * delta) + alpha)

    rhs_ie = ProbEstimate(
        value=ie(a_est.value, alpha_est.value, delta_est.value),
        ci_low=ie(a_est.ci_low, alpha_est.ci_low, delta_est.ci_low),
        ci_high=ie(a_est.ci_high, alpha_est.ci_high, delta_est.ci_high),
        n_samples=mc.samples,
        source="joint-ie",
    )
    logger.info(f"Operating point M={m}: gamma1={point1.threshold:.4f} gamma2={scan.grid[index]:.4f} "
                f"MD<={a_est.value:.4e} IE<={rhs_ie.value:.4e}")
    return OperatingPoint(
        m=int(m),
        delta1=targets.efa,
        gamma1=point1.threshold,
        tau1=point1.tau,
        gamma2=float(scan.grid[index]),
        tau2=0.0,
        delta2=delta_est,
        alpha2=alpha_est,
        rhs_fa=fa_est,
        rhs_md=a_est,
        rhs_ie=rhs_ie,
    )
