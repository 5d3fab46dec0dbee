"""
Tests for the Neyman-Pearson alpha/beta engine.
"""

import math
import unittest

import numpy as np

from src.config.settings import MonteCarloConfig
from src.stats.neyman_pearson import (
    NeymanPearsonEstimator,
    alpha_from_samples,
    beta_from_samples,
    gaussian_alpha,
    gaussian_beta,
    q_inverse,
    weight_normalization,
)
from src.stats.samples import LlrSampleSet, ProbEstimate, SampleSide, TestPoint
from src.utils.errors import DomainError, PrecisionError


def gaussian_pair(mu: float, count: int, seed: int):
    """LLR samples for P = N(mu, 1) against Q = N(0, 1): L = mu x - mu^2 / 2."""
    rng = np.random.default_rng(seed)
    p_values = mu * rng.normal(mu, 1.0, count) - 0.5 * mu ** 2
    q_values = mu * rng.normal(0.0, 1.0, count) - 0.5 * mu ** 2
    return LlrSampleSet(p_values, SampleSide.P, seed), LlrSampleSet(q_values, SampleSide.Q, seed)


class TestSampleTypes(unittest.TestCase):
    """Test cases for the sample containers."""

    def test_rejects_non_finite_values(self):
        with self.assertRaises(DomainError):
            LlrSampleSet(np.array([0.0, np.inf]), SampleSide.P)
        with self.assertRaises(DomainError):
            LlrSampleSet(np.array([np.nan]), SampleSide.Q)

    def test_values_are_read_only(self):
        samples = LlrSampleSet(np.arange(3.0), "P")
        self.assertEqual(samples.count, 3)
        self.assertIs(samples.drawn_under, SampleSide.P)
        with self.assertRaises(ValueError):
            samples.values[0] = 5.0

    def test_negated_swaps_measure(self):
        samples = LlrSampleSet(np.array([1.0, -2.0]), SampleSide.P, seed=3)
        flipped = samples.negated()
        self.assertIs(flipped.drawn_under, SampleSide.Q)
        np.testing.assert_array_equal(flipped.values, [-1.0, 2.0])

    def test_test_point_tau_range(self):
        with self.assertRaises(DomainError):
            TestPoint(threshold=0.0, tau=1.5)

    def test_estimate_interval_must_bracket_value(self):
        with self.assertRaises(DomainError):
            ProbEstimate(value=0.5, ci_low=0.6, ci_high=0.7, n_samples=10)
        exact = ProbEstimate.exact(0.25)
        self.assertEqual(exact.ci_low, exact.ci_high)
        self.assertAlmostEqual(exact.log_value, math.log(0.25))


class TestIdentityLaws(unittest.TestCase):
    """Identical measures are handled analytically."""

    def setUp(self):
        self.p = LlrSampleSet(np.zeros(50), SampleSide.P)
        self.q = LlrSampleSet(np.zeros(50), SampleSide.Q)

    def test_alpha_of_identical_measures(self):
        estimate, point = alpha_from_samples(self.p, self.q, 0.3)
        self.assertAlmostEqual(estimate.value, 0.7, places=12)
        self.assertEqual(point.tau, 0.3)

    def test_beta_of_identical_measures(self):
        estimate, _ = beta_from_samples(self.p, self.q, 0.4)
        self.assertAlmostEqual(estimate.value, 0.4, places=12)

    def test_trivial_endpoints(self):
        p, q = gaussian_pair(1.0, 1000, 0)
        self.assertEqual(alpha_from_samples(p, q, 1.0)[0].value, 0.0)
        self.assertEqual(beta_from_samples(p, q, 0.0)[0].value, 0.0)

    def test_domain_errors(self):
        p, q = gaussian_pair(1.0, 1000, 0)
        with self.assertRaises(DomainError):
            alpha_from_samples(p, q, 0.0)
        with self.assertRaises(DomainError):
            alpha_from_samples(p, q, 1.5)
        with self.assertRaises(DomainError):
            beta_from_samples(p, q, 1.0)
        with self.assertRaises(DomainError):
            alpha_from_samples(None, None, 0.5)

    def test_wrong_side_rejected(self):
        p, q = gaussian_pair(1.0, 100, 0)
        with self.assertRaises(DomainError):
            NeymanPearsonEstimator(q.negated().negated(), p.negated())


class TestGaussianPair(unittest.TestCase):
    """Sample-based alpha/beta against the closed-form Gaussian test."""

    @classmethod
    def setUpClass(cls):
        cls.mc = MonteCarloConfig(samples=200_000, seed=1)
        cls.p, cls.q = gaussian_pair(1.0, 200_000, 11)
        cls.estimator = NeymanPearsonEstimator(cls.p, cls.q, cls.mc)

    def test_closed_form_alpha(self):
        expected = gaussian_alpha(0.5, -0.5, 1.0, 0.05)
        self.assertAlmostEqual(expected, 0.7405, delta=1e-3)

    def test_alpha_matches_closed_form(self):
        estimate, point = self.estimator.alpha(0.05)
        self.assertAlmostEqual(estimate.value, gaussian_alpha(0.5, -0.5, 1.0, 0.05), delta=0.01)
        self.assertLessEqual(estimate.ci_low, estimate.value)
        self.assertGreaterEqual(estimate.ci_high, estimate.value)
        self.assertAlmostEqual(point.threshold, -0.5 + float(q_inverse(0.05)), delta=0.05)

    def test_beta_matches_closed_form(self):
        estimate, _ = self.estimator.beta(0.95)
        self.assertAlmostEqual(estimate.value, gaussian_beta(0.5, -0.5, 1.0, 0.95), delta=0.01)

    def test_alpha_nonincreasing_in_beta(self):
        values = [self.estimator.alpha(b)[0].value for b in (0.01, 0.05, 0.1, 0.2, 0.4, 0.8)]
        self.assertEqual(values, sorted(values, reverse=True))

    def test_beta_nondecreasing_in_alpha(self):
        values = [self.estimator.beta(a)[0].value for a in (0.1, 0.3, 0.5, 0.9, 0.99)]
        self.assertEqual(values, sorted(values))

    def test_duality(self):
        alpha = self.estimator.alpha(0.1)[0]
        beta = self.estimator.beta(1.0 - alpha.value)[0]
        self.assertAlmostEqual(beta.value, 0.1, delta=0.01)

    def test_weight_normalization(self):
        for samples in (self.p, self.q):
            mean, low, high = weight_normalization(samples)
            self.assertLessEqual(low, mean)
            self.assertLessEqual(mean, high)
            self.assertLess(abs(mean - 1.0), 2.0 * (high - low))


class TestDeepTails(unittest.TestCase):
    """Thin tails are reached through the change of measure."""

    def test_small_beta_from_p_samples(self):
        mu = 4.0
        p, q = gaussian_pair(mu, 200_000, 5)
        estimate, _ = beta_from_samples(p, q, 0.5, MonteCarloConfig(samples=200_000))
        expected = gaussian_beta(mu ** 2 / 2, -mu ** 2 / 2, mu ** 2, 0.5)
        self.assertAlmostEqual(estimate.value / expected, 1.0, delta=0.1)

    def test_log_domain_far_below_float_tiny(self):
        mu = 40.0
        p, q = gaussian_pair(mu, 200_000, 9)
        estimate, _ = beta_from_samples(p, q, 0.5)
        # beta = Q(mu) ~ 1e-350, below the smallest double
        expected_log = -0.5 * mu ** 2 - math.log(mu * math.sqrt(2.0 * math.pi))
        self.assertEqual(estimate.value, 0.0)
        self.assertAlmostEqual(estimate.log_value, expected_log, delta=0.5)
        self.assertLessEqual(estimate.log_ci_low, estimate.log_value)
        self.assertGreaterEqual(estimate.log_ci_high, estimate.log_value)

    def test_targets_below_moderate_threshold(self):
        mu, count = 8.0, 200_000
        self.assertLess(1e-3, 10.0 / math.sqrt(count))
        p, q = gaussian_pair(mu, count, 11)
        estimator = NeymanPearsonEstimator(p, q, MonteCarloConfig(samples=count))
        half = mu ** 2 / 2

        alpha, point = estimator.alpha(1e-3)
        self.assertAlmostEqual(point.threshold, -half + mu * float(q_inverse(1e-3)), delta=0.75)
        self.assertAlmostEqual(alpha.log_value, math.log(gaussian_alpha(half, -half, mu ** 2, 1e-3)), delta=0.5)

        beta, _ = estimator.beta(0.999)
        self.assertAlmostEqual(beta.log_value, math.log(gaussian_beta(half, -half, mu ** 2, 0.999)), delta=0.5)

    def test_precision_error_when_tail_is_unsampled(self):
        p = LlrSampleSet(np.array([1.0, 2.0, 3.0, 4.0, 5.0]), SampleSide.P)
        with self.assertRaises(PrecisionError) as ctx:
            beta_from_samples(p, None, 0.5, MonteCarloConfig(samples=5, min_effective_samples=10.0))
        self.assertIsInstance(ctx.exception.estimate, ProbEstimate)


class TestGaussianClosedForms(unittest.TestCase):
    """Closed-form Gaussian alpha/beta."""

    def test_identical_means(self):
        self.assertAlmostEqual(gaussian_alpha(0.3, 0.3, 2.0, 0.2), 0.8, places=12)
        self.assertAlmostEqual(gaussian_beta(0.3, 0.3, 2.0, 0.2), 0.2, places=12)

    def test_preamble_operating_point(self):
        energy = 25.0
        self.assertAlmostEqual(gaussian_alpha(energy / 2, -energy / 2, energy, 1e-4), 0.1001, delta=5e-4)

    def test_degenerate_limit(self):
        energy = 1e-10
        self.assertAlmostEqual(gaussian_alpha(energy / 2, -energy / 2, energy, 0.5), 0.5, places=4)

    def test_nonpositive_variance(self):
        with self.assertRaises(DomainError):
            gaussian_alpha(1.0, 0.0, 0.0, 0.5)
        with self.assertRaises(DomainError):
            gaussian_beta(1.0, 0.0, -1.0, 0.5)


if __name__ == "__main__":
    unittest.main()
