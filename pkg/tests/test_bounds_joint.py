"""
Tests for the joint detection-and-decoding rate bounds.
"""

import math
import unittest

import numpy as np

from src.bounds.joint import (
    DecodingScan,
    dt_genie,
    ensemble_converse,
    finalize_log2m,
    information_estimator,
    joint_achievability,
    joint_operating_point,
    metaconverse,
    optimize_p,
)
from src.bounds.preamble import (
    PreambleSplit,
    minimum_preamble_length,
    preamble_achievability,
    preamble_converse,
)
from src.bounds.results import BoundFlag, BoundKind, BoundResult, TargetProbabilities
from src.channel.biawgn import ChannelSpec, mutual_information
from src.config.settings import MonteCarloConfig
from src.stats.neyman_pearson import NeymanPearsonEstimator
from src.stats.samples import LlrSampleSet, ProbEstimate, SampleSide
from src.utils.errors import DomainError, PrecisionError

MC = MonteCarloConfig(samples=100_000, seed=7)

# quantized per-symbol output grid for the exact small-n reference
Y_GRID = np.linspace(-10.0, 10.0, 20001)
DY = Y_GRID[1] - Y_GRID[0]
STEP = 0.005


def phi(y):
    return np.exp(-0.5 * y * y) / math.sqrt(2.0 * math.pi)


def log_cosh(x):
    return np.logaddexp(x, -x) - math.log(2.0)


def summed_laws(term, weights, n):
    """Laws of the n-fold sum of a per-symbol statistic, binned to STEP."""
    idx = np.round(term / STEP).astype(np.int64)
    lo = int(idx.min())
    laws = []
    for w in weights:
        hist = np.bincount(idx - lo, weights=w * DY)
        hist = hist / hist.sum()
        law = hist
        for _ in range(n - 1):
            law = np.convolve(law, hist)
        laws.append(law)
    return laws


def information_term(rho):
    """Per-symbol information density at x = +sqrt(rho), p = 1/2, over Y_GRID."""
    a = math.sqrt(rho)
    return a * Y_GRID - log_cosh(a * Y_GRID)


def reference_decoding_m(rho, n, budget):
    """Exact (quantized) largest continuous M with alpha + (M-1) delta / 2 <= budget."""
    a = math.sqrt(rho)
    mixture = 0.5 * (phi(Y_GRID - a) + phi(Y_GRID + a))
    joint, product = summed_laws(information_term(rho), [phi(Y_GRID - a), mixture], n)
    alpha = np.cumsum(joint)
    delta = np.cumsum(product[::-1])[::-1] - product
    ok = (delta > 1e-15) & (alpha < budget)
    candidates = 1.0 + 2.0 * (budget - alpha[ok]) / delta[ok]
    return max(1.0 + 2.0 * budget, float(candidates.max(initial=1.0)))


def reference_joint_m(rho, n, targets):
    """Exact (quantized) joint achievability at p = 1/2: returns (A, continuous M)."""
    a = math.sqrt(rho)
    mixture = 0.5 * (phi(Y_GRID - a) + phi(Y_GRID + a))

    py, noise = summed_laws(-0.5 * rho + log_cosh(a * Y_GRID), [mixture, phi(Y_GRID)], n)
    noise_above = np.cumsum(noise[::-1])[::-1] - noise
    k = int(np.argmax(noise_above <= targets.efa))
    tau = (targets.efa - noise_above[k]) / noise[k]
    detection_alpha = float(np.cumsum(py)[k] - tau * py[k])
    return detection_alpha, reference_decoding_m(rho, n, targets.eie - detection_alpha)


def reference_dt_m(rho, n, eie):
    """Exact (quantized) DT bound: largest M with E[exp(-max(0, i - log((M-1)/2)))] <= eie."""
    term = information_term(rho)
    (joint,) = summed_laws(term, [phi(Y_GRID - math.sqrt(rho))], n)
    lo = int(np.round(term / STEP).astype(np.int64).min())
    values = (n * lo + np.arange(joint.size)) * STEP

    def error(g):
        return float(np.sum(joint * np.exp(-np.maximum(0.0, values - g))))

    low, high = -60.0, 60.0
    for _ in range(200):
        mid = 0.5 * (low + high)
        low, high = (mid, high) if error(mid) <= eie else (low, mid)
    return 1.0 + 2.0 * math.exp(low)


def assert_ordered(case, lower, upper, label=""):
    """lower <= upper within three combined CI half-widths."""
    half = math.hypot(0.5 * (lower.ci_high - lower.ci_low), 0.5 * (upper.ci_high - upper.ci_low))
    case.assertLessEqual(lower.log2m, upper.log2m + 3.0 * half + 1e-9,
                         f"{label}: {lower.bound_kind.value}={lower.log2m:.4f} > {upper.bound_kind.value}={upper.log2m:.4f}")


class TestResultTypes(unittest.TestCase):
    """Test cases for targets and results."""

    def test_targets_in_open_interval(self):
        with self.assertRaises(DomainError):
            TargetProbabilities(efa=0.0, emd=0.1, eie=0.1)
        with self.assertRaises(DomainError):
            TargetProbabilities(efa=0.1, emd=1.0, eie=0.1)

    def test_result_rate_and_flags(self):
        result = BoundResult(8.0, 16, BoundKind.JOINT_ACH, 7.5, 8.5, {"p": 0.5}, (BoundFlag.CAPPED,))
        self.assertEqual(result.rate, 0.5)
        self.assertTrue(result.has_flag(BoundFlag.CAPPED))
        self.assertEqual(result.with_params(p_star=0.5).params["p_star"], 0.5)
        zero = BoundResult.zero(BoundKind.ENSEMBLE_CONV, 10, BoundFlag.INDICATOR_VIOLATED)
        self.assertTrue(zero.is_zero)
        self.assertEqual(zero.rate, 0.0)

    def test_finalize_log2m(self):
        self.assertEqual(finalize_log2m(-1.0, 10, True), (0.0, ()))
        self.assertEqual(finalize_log2m(12.0, 10, True), (10.0, (BoundFlag.CAPPED,)))
        value, _ = finalize_log2m(math.log2(6.7), 10, True)
        self.assertAlmostEqual(value, math.log2(6))
        value, _ = finalize_log2m(math.log2(6.7), 10, False)
        self.assertAlmostEqual(value, math.log2(6.7))


class TestSameMeasureClosedForms(unittest.TestCase):
    """With Q_Y = P_Y the same-measure terms are exact."""

    def setUp(self):
        zeros = np.zeros(200)
        self.estimator = NeymanPearsonEstimator(LlrSampleSet(zeros, SampleSide.P),
                                                LlrSampleSet(zeros, SampleSide.Q))

    def test_one_minus_alpha_is_clamped_budget(self):
        for b in (0.05, 0.5, 1.0, 3.0):
            self.assertAlmostEqual(1.0 - self.estimator.alpha(min(1.0, b))[0].value, min(1.0, b), places=12)

    def test_beta_is_identity(self):
        for a in (0.0, 0.2, 0.9):
            self.assertAlmostEqual(self.estimator.beta(a)[0].value, a, places=12)


class TestInfeasibleDetection(unittest.TestCase):
    """A detector too weak for the MD target zeroes the bounds."""

    def setUp(self):
        self.spec = ChannelSpec(rho=1.0, p=0.5, n=4)
        self.targets = TargetProbabilities(efa=1e-3, emd=1e-2, eie=1e-2)

    def test_joint_achievability_is_zero(self):
        result = joint_achievability(self.spec, self.targets, MC)
        self.assertEqual(result.log2m, 0.0)
        self.assertTrue(result.has_flag(BoundFlag.INFEASIBLE_DETECTION))
        self.assertGreater(result.params["detection_alpha"], self.targets.emd)

    def test_ensemble_converse_indicator(self):
        result = ensemble_converse(self.spec, self.targets, MC)
        self.assertEqual(result.log2m, 0.0)
        self.assertTrue(result.has_flag(BoundFlag.INDICATOR_VIOLATED))


class TestBoundOrdering(unittest.TestCase):
    """Achievability never beats the converse at the same operating point."""

    @classmethod
    def setUpClass(cls):
        cls.spec = ChannelSpec(rho=4.0, p=0.5, n=16)
        cls.targets = TargetProbabilities(efa=1e-2, emd=1e-1, eie=1e-1)
        cls.joint = joint_achievability(cls.spec, cls.targets, MC)
        cls.ensemble = ensemble_converse(cls.spec, cls.targets, MC)
        cls.meta = metaconverse(cls.spec, cls.targets.eie, MC)
        cls.dt = dt_genie(cls.spec, cls.targets.eie, MC)

    def test_bounds_are_positive(self):
        for result in (self.joint, self.ensemble, self.meta, self.dt):
            self.assertGreater(result.log2m, 0.0)
            self.assertLessEqual(result.ci_low, result.log2m)
            self.assertGreaterEqual(result.ci_high, result.log2m)
            self.assertLessEqual(result.log2m, self.spec.n)

    def test_joint_below_ensemble_converse(self):
        self.assertLessEqual(self.joint.log2m, self.ensemble.ci_high)

    def test_dt_below_metaconverse(self):
        self.assertLessEqual(self.dt.log2m, self.meta.ci_high)

    def test_genie_detection_helps(self):
        self.assertLessEqual(self.joint.log2m, self.dt.ci_high + 0.5)

    def test_joint_parameters(self):
        params = self.joint.params
        self.assertEqual(params["delta1"], self.targets.efa)
        self.assertLessEqual(params["detection_alpha"], self.targets.emd)
        self.assertAlmostEqual(params["residual_budget"], self.targets.eie - params["detection_alpha"])
        self.assertGreaterEqual(params["log2m_limit"], self.joint.log2m)
        self.assertAlmostEqual(self.joint.m, round(self.joint.m), places=6)

    def test_joint_monotone_in_eie(self):
        low = joint_achievability(self.spec, TargetProbabilities(1e-2, 1e-1, 0.05), MC)
        high = joint_achievability(self.spec, TargetProbabilities(1e-2, 1e-1, 0.2), MC)
        self.assertLessEqual(low.log2m, self.joint.log2m)
        self.assertLessEqual(self.joint.log2m, high.log2m)


class TestSmallBlockReference(unittest.TestCase):
    """Joint achievability against exact laws computed on a quantized output grid."""

    def test_matches_reference(self):
        rho, n = 2.0, 4
        targets = TargetProbabilities(efa=0.1, emd=0.5, eie=0.5)
        detection_alpha, m_cont = reference_joint_m(rho, n, targets)
        result = joint_achievability(ChannelSpec(rho=rho, p=0.5, n=n), targets, MC)

        self.assertAlmostEqual(result.params["detection_alpha"], detection_alpha, delta=0.01)
        expected = min(m_cont, 2.0 ** n)
        self.assertLessEqual(abs(result.m - expected), 1.0 + 0.15 * expected)


class TestMetaconverseAndDt(unittest.TestCase):
    """Genie-aided bounds."""

    def setUp(self):
        self.spec = ChannelSpec(rho=1.0, p=0.5, n=12)

    def test_metaconverse_ignores_input_skew(self):
        half = metaconverse(self.spec, 0.05, MC)
        skewed = metaconverse(self.spec.with_p(0.8), 0.05, MC)
        self.assertEqual(half.log2m, skewed.log2m)
        self.assertEqual(half.params["p"], 0.5)

    def test_metaconverse_monotone_in_eie(self):
        values = [metaconverse(self.spec, eie, MC).log2m for eie in (0.01, 0.1, 0.5)]
        self.assertEqual(values, sorted(values))

    def test_capped_at_unit_error(self):
        for bound in (metaconverse, dt_genie):
            result = bound(self.spec, 1.0, MC)
            self.assertEqual(result.log2m, float(self.spec.n))
            self.assertTrue(result.has_flag(BoundFlag.CAPPED))

    def test_nonpositive_error_rejected(self):
        with self.assertRaises(DomainError):
            metaconverse(self.spec, 0.0, MC)
        with self.assertRaises(DomainError):
            dt_genie(self.spec, -0.1, MC)


class TestOptimizeP(unittest.TestCase):
    """Input-skew optimization."""

    def setUp(self):
        self.targets = TargetProbabilities(efa=1e-2, emd=1e-1, eie=1e-1)

    def test_single_point_grid(self):
        p_star, result = optimize_p(16, 4.0, self.targets, [0.5], MC)
        direct = joint_achievability(ChannelSpec(4.0, 0.5, 16), self.targets, MC)
        self.assertEqual(p_star, 0.5)
        self.assertEqual(result.log2m, direct.log2m)
        self.assertEqual(result.params["p_star"], 0.5)

    def test_picks_grid_maximum(self):
        grid = [0.7, 0.5, 0.7]
        p_star, result = optimize_p(16, 4.0, self.targets, grid, MC)
        values = [joint_achievability(ChannelSpec(4.0, p, 16), self.targets, MC).log2m for p in (0.5, 0.7)]
        self.assertIn(p_star, (0.5, 0.7))
        self.assertEqual(result.log2m, max(values))

    def test_empty_grid(self):
        with self.assertRaises(DomainError):
            optimize_p(16, 4.0, self.targets, [], MC)


class TestOperatingPoint(unittest.TestCase):
    """Thresholds for a fixed codebook size."""

    def test_fixed_m_guarantees(self):
        spec = ChannelSpec(rho=4.0, p=0.5, n=8)
        targets = TargetProbabilities(efa=0.1, emd=0.5, eie=0.5)
        op = joint_operating_point(spec, targets, 4, MC)
        self.assertEqual(op.delta1, 0.1)
        self.assertAlmostEqual(op.rhs_fa.value, 0.1, delta=0.01)
        self.assertLessEqual(op.rhs_md.value, op.rhs_ie.value)
        self.assertLessEqual(op.rhs_ie.ci_low, op.rhs_ie.value)

        scan = DecodingScan(information_estimator(spec, MC))
        _, best = scan.ie_rhs(4)
        self.assertAlmostEqual(op.rhs_ie.value, min(1.0, op.rhs_md.value + best), places=12)

    def test_invalid_m(self):
        spec = ChannelSpec(rho=4.0, p=0.5, n=8)
        with self.assertRaises(DomainError):
            joint_operating_point(spec, TargetProbabilities(0.1, 0.5, 0.5), 0, MC)


class TestThinErrorTarget(unittest.TestCase):
    """Inclusive-error targets well below 10/sqrt(N)."""

    @classmethod
    def setUpClass(cls):
        cls.spec = ChannelSpec(rho=1.0, p=0.5, n=200)
        cls.targets = TargetProbabilities(efa=0.2, emd=0.5, eie=1e-3)
        cls.joint = joint_achievability(cls.spec, cls.targets, MC)
        cls.ensemble = ensemble_converse(cls.spec, cls.targets, MC)
        cls.meta = metaconverse(cls.spec, cls.targets.eie, MC)
        cls.dt = dt_genie(cls.spec, cls.targets.eie, MC)

    def test_regime(self):
        self.assertLess(self.targets.eie, 10.0 / math.sqrt(MC.samples))

    def test_missed_codeword_term_is_sampled(self):
        self.assertGreater(self.joint.params["alpha2"], 1e-6)
        self.assertLess(self.joint.params["alpha2"], self.joint.params["residual_budget"])

    def test_orderings(self):
        assert_ordered(self, self.joint, self.dt, "thin")
        assert_ordered(self, self.dt, self.meta, "thin")
        assert_ordered(self, self.joint, self.ensemble, "thin")


class TestOrderingGrid(unittest.TestCase):
    """Bound orderings across blocklengths and SNRs."""

    def test_orderings(self):
        mc = MonteCarloConfig(samples=20_000, seed=7)
        targets = TargetProbabilities(efa=1e-2, emd=1e-1, eie=1e-1)
        for rho in (0.5, 1.0, 2.0, 4.0):
            for n in (16, 24, 32, 48, 64):
                with self.subTest(rho=rho, n=n):
                    spec = ChannelSpec(rho=rho, p=0.5, n=n)
                    joint = joint_achievability(spec, targets, mc)
                    ensemble = ensemble_converse(spec, targets, mc)
                    meta = metaconverse(spec, targets.eie, mc)
                    dt = dt_genie(spec, targets.eie, mc)
                    label = f"rho={rho} n={n}"
                    assert_ordered(self, joint, ensemble, label)
                    assert_ordered(self, dt, meta, label)
                    assert_ordered(self, joint, dt, label)

                    n_p = minimum_preamble_length(n, rho, targets)
                    if n_p is None:
                        continue
                    split = PreambleSplit.from_total(n, n_p)
                    preamble = preamble_achievability(spec, split, targets, mc)
                    assert_ordered(self, preamble, preamble_converse(spec, split, targets.eie, mc), label)
                    assert_ordered(self, preamble, joint, label)


class TestLongBlock(unittest.TestCase):
    """Metaconverse and DT at a long blocklength."""

    @classmethod
    def setUpClass(cls):
        cls.mc = MonteCarloConfig(samples=20_000, seed=7)
        cls.spec = ChannelSpec(rho=1.0, p=0.5, n=400)
        cls.meta = metaconverse(cls.spec, 0.5, cls.mc)
        cls.dt = dt_genie(cls.spec, 0.5, cls.mc)

    def test_metaconverse_near_mutual_information(self):
        self.assertLess(abs(self.meta.rate - mutual_information(1.0, 0.5)), 0.03)

    def test_dt_below_metaconverse(self):
        self.assertLessEqual(self.dt.log2m, self.meta.ci_high)


class TestSmallBlockGenieAndConverse(unittest.TestCase):
    """DT and ensemble converse against the quantized exact laws."""

    def test_dt_matches_reference(self):
        rho, n, eie = 1.0, 4, 0.3
        expected = min(reference_dt_m(rho, n, eie), 2.0 ** n)
        result = dt_genie(ChannelSpec(rho=rho, p=0.5, n=n), eie, MC)
        self.assertLessEqual(abs(result.m - expected), 1.0 + 0.1 * expected)

    def test_ensemble_converse_above_joint(self):
        rho, n = 2.0, 4
        targets = TargetProbabilities(efa=0.1, emd=0.5, eie=0.5)
        spec = ChannelSpec(rho=rho, p=0.5, n=n)
        ensemble = ensemble_converse(spec, targets, MC)
        _, m_cont = reference_joint_m(rho, n, targets)
        self.assertLessEqual(joint_achievability(spec, targets, MC).log2m, ensemble.ci_high)
        self.assertLessEqual(math.log2(min(m_cont, 2.0 ** n)), ensemble.ci_high + 0.05)

    def test_preamble_matches_reference(self):
        rho, n_p, n_d = 2.0, 2, 4
        targets = TargetProbabilities(efa=0.1, emd=0.5, eie=0.5)
        spec = ChannelSpec(rho=rho, p=0.5, n=n_p + n_d)
        result = preamble_achievability(spec, PreambleSplit(n_p=n_p, n_d=n_d), targets, MC)
        emd = result.params["emd_achieved"]
        expected = min(reference_decoding_m(rho, n_d, (targets.eie - emd) / (1.0 - emd)), 2.0 ** n_d)
        self.assertLessEqual(abs(result.m - expected), 1.0 + 0.15 * expected)


class TestDecodingScanFloor(unittest.TestCase):
    """Effective-sample floor on the decoding threshold scan."""

    def setUp(self):
        self.spec = ChannelSpec(rho=1.0, p=0.5, n=16)

    def test_usable_thresholds_meet_floor_on_both_tails(self):
        mc = MonteCarloConfig(samples=20_000, seed=7)
        scan = DecodingScan(information_estimator(self.spec, mc))
        floor = math.log(mc.min_effective_samples)
        usable = np.flatnonzero(scan.usable)[1:]
        self.assertGreater(usable.size, 0)
        self.assertTrue(np.all(scan.alpha_curve.log_ess[usable] >= floor))
        self.assertTrue(np.all(scan.delta_curve.log_ess[usable] >= floor))

    def test_cut_off_maximizer_raises(self):
        mc = MonteCarloConfig(samples=20_000, seed=7, min_effective_samples=1e9)
        scan = DecodingScan(information_estimator(self.spec, mc))
        with self.assertRaises(PrecisionError) as ctx:
            scan.best(0.1)
        self.assertIsInstance(ctx.exception.estimate, ProbEstimate)


if __name__ == "__main__":
    unittest.main()
