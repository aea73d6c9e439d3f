import io
import json
import math
import unittest

import numpy
from scipy.signal import lfilter
from scipy.stats import chi2, norm

from qgarchbench.components.diagnostics import (
    acf,
    act_window,
    AcfSeries,
    batch_means_error,
    default_t_max,
    histogram,
    integrated_act,
    overlap_coefficient,
    summarize,
)
from qgarchbench.model import DEFAULT_TRUE_PARAMS, PARAM_NAMES, QgarchParams
from qgarchbench.utils.errors import ActNotConvergedError, ValidationError


def _ar1(rho: float, n: int, seed: int) -> numpy.ndarray:
    noise = numpy.random.default_rng(seed).standard_normal(n)
    return lfilter([1.0], [1.0, -rho], noise)


class TestAcf(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.iid = numpy.random.default_rng(0).standard_normal(100000)
        cls.ar = _ar1(0.9, 1000000, seed=1)

    def test_lag_zero_is_one(self):
        series = acf(self.iid[:1000])
        self.assertEqual(series.values[0], 1.0)
        self.assertEqual(series.t_max, default_t_max(1000))
        self.assertEqual(series.n, 1000)
        numpy.testing.assert_array_equal(series.lags[:3], [0, 1, 2])

    def test_default_t_max(self):
        self.assertEqual(default_t_max(150), 100)
        self.assertEqual(default_t_max(50), 49)
        self.assertEqual(default_t_max(100000), 10000)

    def test_iid_stays_in_band(self):
        values = acf(self.iid, t_max=50).values
        self.assertTrue(numpy.all(numpy.abs(values[1:]) < 0.02))

    def test_ar1_matches_geometric_decay(self):
        values = acf(self.ar, t_max=20).values
        numpy.testing.assert_allclose(values, 0.9 ** numpy.arange(21), rtol=0, atol=0.015)

    def test_shift_and_scale_invariance(self):
        x = self.iid[:5000]
        numpy.testing.assert_allclose(
            acf(3.0 * x + 5.0, t_max=30).values, acf(x, t_max=30).values, rtol=1e-9, atol=1e-12
        )

    def test_matches_direct_sum(self):
        x = self.ar[:400]
        dx = x - x.mean()
        c0 = numpy.dot(dx, dx)
        values = acf(x, t_max=10).values
        for t in range(1, 11):
            self.assertAlmostEqual(values[t], numpy.dot(dx[:-t], dx[t:]) / c0, places=12)

    def test_invalid_input(self):
        with self.assertRaises(ValidationError):
            acf(numpy.ones(500))
        with self.assertRaisesRegex(ValidationError, "zero variance"):
            acf(numpy.full(500, 0.3))
        with self.assertRaises(ValidationError):
            acf(self.iid[:100], t_max=100)
        with self.assertRaises(ValidationError):
            acf(self.iid[:100], t_max=0)
        with self.assertRaises(ValidationError):
            acf(numpy.zeros((10, 2)))
        with self.assertRaises(ValidationError):
            AcfSeries.ideal([0.5, 0.2], n=10)


class TestIntegratedAct(unittest.TestCase):
    def test_uncorrelated_curve(self):
        curve = numpy.zeros(50)
        curve[0] = 1.0
        window = act_window(AcfSeries.ideal(curve, n=10000))
        self.assertEqual(window.tau, 0.5)
        self.assertEqual(window.window, 3)
        self.assertTrue(window.converged)
        self.assertFalse(window.negative_sum)

    def test_geometric_curve(self):
        curve = 0.9 ** numpy.arange(201)
        window = act_window(AcfSeries.ideal(curve, n=100000))
        self.assertEqual(window.window, 57)
        self.assertAlmostEqual(window.tau, 9.5 - 9.0 * 0.9**57, places=10)
        self.assertLess(abs(window.tau - 9.5), 0.05)
        self.assertAlmostEqual(
            window.tau_error, window.tau * math.sqrt(2.0 * 115 / 100000), places=12
        )

    def test_larger_c_widens_window(self):
        curve = AcfSeries.ideal(0.9 ** numpy.arange(201), n=100000)
        self.assertGreater(act_window(curve, c=10.0).window, act_window(curve).window)

    def test_no_window_found(self):
        curve = AcfSeries.ideal(numpy.ones(11), n=1000)
        window = act_window(curve)
        self.assertFalse(window.converged)
        self.assertEqual(window.window, 10)
        self.assertEqual(window.tau, 10.5)
        with self.assertRaises(ActNotConvergedError):
            integrated_act(curve)

    def test_negative_sum_is_reported(self):
        curve = numpy.zeros(11)
        curve[:2] = [1.0, -0.8]
        window = act_window(AcfSeries.ideal(curve, n=1000))
        self.assertEqual(window.window, 1)
        self.assertTrue(window.negative_sum)
        self.assertAlmostEqual(window.tau, -0.3, places=12)
        self.assertGreater(window.tau_error, 0.0)

    def test_ar1_estimate(self):
        tau, err = integrated_act(acf(_ar1(0.9, 1000000, seed=2), t_max=500))
        self.assertLess(abs(tau / 9.5 - 1.0), 0.15)
        self.assertLess(err, 0.5)


class TestSummaries(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.iid = numpy.random.default_rng(3).standard_normal(100000)

    def test_iid_summary(self):
        report = summarize(self.iid, ["x"], sampler_name="iid")
        x = report["x"]
        self.assertLess(abs(x.two_tau - 1.0), 0.2)
        self.assertLess(abs(x.mean), 0.01)
        self.assertAlmostEqual(x.sd, float(numpy.std(self.iid, ddof=1)), places=12)
        self.assertAlmostEqual(x.se, x.sd * math.sqrt(x.two_tau / self.iid.size), places=12)
        self.assertTrue(x.converged)
        self.assertEqual(report.n_samples, 100000)
        self.assertEqual(report.histograms["x"].total, 100000)

    def test_batch_means_agree_with_act(self):
        report = summarize(_ar1(0.9, 1000000, seed=4), ["x"], t_max=500)
        x = report["x"]
        self.assertIsNotNone(x.se_batch)
        self.assertLess(max(x.se / x.se_batch, x.se_batch / x.se), 1.5)
        self.assertLess(abs(x.two_tau / 19.0 - 1.0), 0.15)

    def test_batch_means_error(self):
        x = numpy.arange(8, dtype=float)
        # batch means 1.5 and 5.5
        self.assertAlmostEqual(batch_means_error(x, 4), numpy.std([1.5, 5.5], ddof=1) / math.sqrt(2))
        with self.assertRaises(ValidationError):
            batch_means_error(x, 5)
        with self.assertRaises(ValidationError):
            batch_means_error(x, 0)

    def test_params_chain(self):
        rng = numpy.random.default_rng(5)
        chain = [
            QgarchParams.from_array(DEFAULT_TRUE_PARAMS.to_array() + 0.01 * rng.standard_normal(4))
            for _ in range(200)
        ]
        report = summarize(chain)
        self.assertEqual(list(report.parameters), list(PARAM_NAMES))
        self.assertAlmostEqual(report["beta"].mean, 0.8, delta=0.005)

    def test_rejects_short_or_constant_chains(self):
        with self.assertRaises(ValidationError):
            summarize(self.iid[:99], ["x"])
        chain = numpy.column_stack([self.iid[:500], numpy.full(500, 0.3)])
        with self.assertRaisesRegex(ValidationError, "^y: "):
            summarize(chain, ["x", "y"])
        with self.assertRaisesRegex(ValidationError, "^gamma: .*zero variance"):
            summarize(
                numpy.column_stack([self.iid[:500]] * 3 + [numpy.full(500, -0.05)]),
                ["alpha", "beta", "omega", "gamma"],
            )
        with self.assertRaises(ValidationError):
            summarize(chain, ["x"])

    def test_json_report(self):
        chain = numpy.random.default_rng(6).standard_normal((1000, 4))
        report = summarize(
            chain,
            PARAM_NAMES,
            sampler_name="adaptive",
            acceptance_trace=[(500, 0.5)],
            acceptance=0.45,
        )
        buf = io.StringIO()
        report.write_json_to_file(buf, "abc123")
        data = json.loads(buf.getvalue())
        self.assertEqual(list(data)[0], "config_hash")
        self.assertEqual(data["config_hash"], "abc123")
        self.assertEqual(data["sampler"], "adaptive")
        self.assertEqual(data["samples"], 1000)
        self.assertEqual(data["acceptance"], 0.45)
        self.assertEqual(list(data["parameters"]), list(PARAM_NAMES))
        self.assertEqual(
            set(data["parameters"]["alpha"]),
            {"mean", "sd", "se", "se_batch", "two_tau", "two_tau_err", "window", "converged",
             "negative_window_sum"},
        )
        self.assertEqual(data["acceptance_trace"], [{"step": 500, "acceptance": 0.5}])
        self.assertIn("2tau", str(report))


class TestHistogram(unittest.TestCase):
    def test_small_example(self):
        hist = histogram([0.0, 1.0, 2.0, 3.0], bins=2)
        numpy.testing.assert_array_equal(hist.edges, [0.0, 1.5, 3.0])
        numpy.testing.assert_array_equal(hist.counts, [2, 2])
        self.assertEqual(list(hist.rows())[0], ["0.0", "1.5", 2])

    def test_shared_range_keeps_every_point(self):
        hist = histogram([-10.0, 0.5, 10.0], bins=4, range=(0.0, 1.0))
        self.assertEqual(hist.total, 3)
        self.assertEqual(hist.counts[0], 1)
        self.assertEqual(hist.counts[-1], 1)

    def test_gaussian_chi_square(self):
        x = numpy.random.default_rng(7).standard_normal(100000)
        hist = histogram(x, bins=30, range=(-3.0, 3.0))
        cdf = norm.cdf(hist.edges)
        cdf[0], cdf[-1] = 0.0, 1.0
        expected = numpy.diff(cdf) * x.size
        stat = float(numpy.sum((hist.counts - expected) ** 2 / expected))
        self.assertLess(stat, chi2.ppf(0.999, df=29))

    def test_overlap(self):
        a = numpy.linspace(0.0, 1.0, 1000)
        self.assertAlmostEqual(overlap_coefficient(a, a), 1.0, places=12)
        self.assertEqual(overlap_coefficient(a, a + 2.0), 0.0)
        self.assertEqual(overlap_coefficient(numpy.ones(5), numpy.ones(7)), 1.0)

    def test_invalid(self):
        with self.assertRaises(ValidationError):
            histogram([1.0, 2.0], bins=1)
        with self.assertRaises(ValidationError):
            histogram([], bins=10)


if __name__ == "__main__":
    unittest.main()
