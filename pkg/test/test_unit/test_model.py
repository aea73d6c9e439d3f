import math
import unittest

import numpy
from scipy.stats import norm

from qgarchbench.model import (
    DEFAULT_TRUE_PARAMS,
    evaluate_log_posterior,
    omega_profile_posterior_mean,
    QgarchParams,
    QgarchPosterior,
    SeriesData,
    simulate,
    variance_recursion,
)
from qgarchbench.utils.errors import InvalidParamsError, ValidationError


def _direct_log_product(params: QgarchParams, y, sigma2_init: float) -> float:
    density = 1.0
    sigma2 = sigma2_init
    for t in range(len(y)):
        if t > 0:
            sigma2 = (
                params.omega
                + params.gamma * y[t - 1]
                + params.alpha * y[t - 1] ** 2
                + params.beta * sigma2
            )
        density *= math.exp(-y[t] ** 2 / (2.0 * sigma2)) / math.sqrt(2.0 * math.pi * sigma2)
    return math.log(density)


class TestVarianceRecursion(unittest.TestCase):
    def test_one_step_unit_inputs(self):
        path = variance_recursion(DEFAULT_TRUE_PARAMS, SeriesData(y=[1.0, 0.0]), 1.0)
        self.assertAlmostEqual(path.sigma2[1], 0.92, places=12)

    def test_one_step_large_shock(self):
        path = variance_recursion(DEFAULT_TRUE_PARAMS, SeriesData(y=[3.0, 0.0]), 0.5)
        self.assertAlmostEqual(path.sigma2[1], 0.98, places=12)

    def test_intercept_only_model(self):
        y = SeriesData(y=numpy.random.default_rng(3).standard_normal(50))
        path = variance_recursion(QgarchParams(0.0, 0.0, 0.37, 0.0), y, 2.0)
        self.assertEqual(len(path), 50)
        self.assertEqual(path.sigma2[0], 2.0)
        numpy.testing.assert_allclose(path.sigma2[1:], 0.37, rtol=0, atol=1e-15)

    def test_rejects_non_positive_start(self):
        with self.assertRaises(ValidationError):
            variance_recursion(DEFAULT_TRUE_PARAMS, SeriesData(y=[1.0, 2.0]), 0.0)


class TestLogPosterior(unittest.TestCase):
    def test_single_observation_at_zero(self):
        value = evaluate_log_posterior(QgarchParams(0.0, 0.0, 1.0, 0.0), SeriesData(y=[0.0]), 1.0)
        self.assertAlmostEqual(value, -0.5 * math.log(2.0 * math.pi), places=12)
        self.assertAlmostEqual(value, -0.9189, places=4)

    def test_outside_support_is_minus_inf(self):
        y = SeriesData(y=[0.3, -0.2, 0.5])
        for params in (
            QgarchParams(0.07, 0.8, 0.0, -0.05),
            QgarchParams(0.07, 0.8, -0.1, -0.05),
            QgarchParams(-0.01, 0.8, 0.1, -0.05),
            QgarchParams(0.07, -0.2, 0.1, -0.05),
        ):
            self.assertEqual(evaluate_log_posterior(params, y, 1.0), -math.inf)

    def test_negative_variance_is_minus_inf(self):
        # omega + gamma * y = 0.1 - 5 < 0 at the second step
        y = SeriesData(y=[1.0, 0.5])
        value = evaluate_log_posterior(QgarchParams(0.0, 0.0, 0.1, -5.0), y, 1.0)
        self.assertEqual(value, -math.inf)

    def test_matches_direct_product(self):
        y = [0.31, -1.12, 0.05, 0.88, -0.47, 1.63, -0.29, 0.12, -0.95, 0.40]
        for sigma2_init in (0.769, 1.0, 2.5):
            expected = _direct_log_product(DEFAULT_TRUE_PARAMS, y, sigma2_init)
            value = evaluate_log_posterior(DEFAULT_TRUE_PARAMS, SeriesData(y=y), sigma2_init)
            self.assertLess(abs(value - expected), 1e-12 * abs(expected))

    def test_appending_an_observation_adds_one_term(self):
        y = simulate(DEFAULT_TRUE_PARAMS, 101, seed=4).y
        shorter = evaluate_log_posterior(DEFAULT_TRUE_PARAMS, SeriesData(y=y[:100]), 0.8)
        longer = evaluate_log_posterior(DEFAULT_TRUE_PARAMS, SeriesData(y=y), 0.8)
        sigma2 = variance_recursion(DEFAULT_TRUE_PARAMS, SeriesData(y=y), 0.8).sigma2[-1]
        term = -0.5 * (math.log(2.0 * math.pi * sigma2) + y[-1] ** 2 / sigma2)
        self.assertAlmostEqual(longer - shorter, term, places=9)

    def test_intercept_only_is_iid_gaussian(self):
        y = numpy.random.default_rng(6).standard_normal(200) * 0.7
        value = evaluate_log_posterior(QgarchParams(0.0, 0.0, 0.49, 0.0), SeriesData(y=y), 0.49)
        expected = float(numpy.sum(norm.logpdf(y, scale=0.7)))
        self.assertAlmostEqual(value, expected, places=9)

    def test_series_validation(self):
        with self.assertRaises(ValidationError):
            SeriesData(y=[])
        with self.assertRaises(ValidationError):
            SeriesData(y=[1.0, float("nan")])
        with self.assertRaises(ValidationError):
            SeriesData(y=[[1.0, 2.0]])
        with self.assertRaises(ValidationError):
            SeriesData(y=[1.0]).sample_variance()


class TestSimulate(unittest.TestCase):
    def test_deterministic(self):
        a = simulate(DEFAULT_TRUE_PARAMS, 500, seed=42)
        b = simulate(DEFAULT_TRUE_PARAMS, 500, seed=42)
        numpy.testing.assert_array_equal(a.y, b.y)
        self.assertEqual(a.n, 500)
        self.assertEqual(a.meta["seed"], 42)
        self.assertEqual(a.meta["params"], DEFAULT_TRUE_PARAMS.as_dict())

    def test_different_seeds_differ(self):
        a = simulate(DEFAULT_TRUE_PARAMS, 100, seed=1)
        b = simulate(DEFAULT_TRUE_PARAMS, 100, seed=2)
        self.assertFalse(numpy.array_equal(a.y, b.y))

    def test_iid_gaussian_limit(self):
        series = simulate(QgarchParams(0.0, 0.0, 1.0, 0.0), 100000, seed=7)
        self.assertAlmostEqual(series.sample_variance(), 1.0, delta=0.02)

    def test_unconditional_variance(self):
        series = simulate(DEFAULT_TRUE_PARAMS, 200000, seed=11)
        target = DEFAULT_TRUE_PARAMS.unconditional_variance()
        self.assertAlmostEqual(target, 0.1 / 0.13, places=12)
        self.assertLess(abs(series.sample_variance() / target - 1.0), 0.05)

    def test_rejects_invalid_params(self):
        with self.assertRaisesRegex(InvalidParamsError, "alpha must be >= 0"):
            simulate(QgarchParams(-0.1, 0.8, 0.1, 0.0), 10, seed=0)
        with self.assertRaisesRegex(InvalidParamsError, "alpha \\+ beta must be < 1"):
            simulate(QgarchParams(0.3, 0.7, 0.1, 0.0), 10, seed=0)
        with self.assertRaises(ValidationError):
            simulate(DEFAULT_TRUE_PARAMS, 0, seed=0)


class TestPosterior(unittest.TestCase):
    def setUp(self):
        self.series = simulate(DEFAULT_TRUE_PARAMS, 300, seed=5)

    def test_full_posterior_matches_evaluate(self):
        posterior = QgarchPosterior.from_series(self.series)
        self.assertEqual(posterior.dim, 4)
        self.assertEqual(posterior.sigma2_init, float(numpy.var(self.series.y)))
        theta = DEFAULT_TRUE_PARAMS.to_array()
        self.assertEqual(
            posterior(theta),
            evaluate_log_posterior(DEFAULT_TRUE_PARAMS, self.series, posterior.sigma2_init),
        )
        self.assertTrue(math.isfinite(posterior(posterior.initial_point())))

    def test_restricted_posterior(self):
        fixed = QgarchParams(0.0, 0.0, 1.0, 0.0)
        posterior = QgarchPosterior.from_series(self.series, free=("omega",), fixed=fixed)
        self.assertEqual(posterior.dim, 1)
        numpy.testing.assert_array_equal(posterior.expand(numpy.array([0.4])), [0.0, 0.0, 0.4, 0.0])
        numpy.testing.assert_array_equal(posterior.select(DEFAULT_TRUE_PARAMS.to_array()), [0.1])
        self.assertEqual(
            posterior(numpy.array([0.4])),
            evaluate_log_posterior(QgarchParams(0.0, 0.0, 0.4, 0.0), self.series, posterior.sigma2_init),
        )

    def test_restricted_posterior_needs_fixed_values(self):
        with self.assertRaises(ValidationError):
            QgarchPosterior.from_series(self.series, free=("omega",))
        with self.assertRaises(ValidationError):
            QgarchPosterior.from_series(self.series, free=("delta",))

    def test_omega_profile_is_inverse_gamma(self):
        series = simulate(QgarchParams(0.0, 0.0, 1.0, 0.0), 200, seed=9)
        s = float(numpy.sum(series.y[1:] ** 2))
        m = series.n - 1
        mean, sd = omega_profile_posterior_mean(series, series.sample_variance())
        self.assertAlmostEqual(mean / (s / (m - 4)), 1.0, delta=1e-5)
        self.assertAlmostEqual(sd / (mean / math.sqrt(m / 2.0 - 3.0)), 1.0, delta=1e-4)


if __name__ == "__main__":
    unittest.main()
