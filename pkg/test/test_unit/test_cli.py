import contextlib
import io
import json
import tempfile
import unittest

from pathlib import Path

from qgarchbench.cli import EXIT_OK, EXIT_VALIDATION, run
from qgarchbench.components.export import file_sha256, read_series_json
from qgarchbench.utils.run_utils import run_config

SMALL_CHAIN_ARGS = [
    "--burn-in", "300",
    "--pilot", "200",
    "--refresh", "200",
    "--analysis-samples", "1000",
    "-q",
]

SMALL_CONFIG = """\
n_obs: 300
burn_in: 300
pilot: 200
refresh: 200
analysis_samples: 1000
metropolis_burn_in: 300
metropolis_samples: 1000
"""


def _run(args):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = run(args)
    return code, out.getvalue(), err.getvalue()


class TestCli(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def _simulate(self, name="data.csv", n=300, seed=5):
        path = self.tmp / name
        code, out, _ = _run(["simulate", "--n", str(n), "--seed", str(seed), "--output", str(path), "-q"])
        self.assertEqual(code, EXIT_OK)
        return path, out

    def test_simulate(self):
        path, out = self._simulate()
        self.assertIn("wrote 300 observations", out)
        self.assertEqual(len(path.read_text().splitlines()), 300)
        self.assertEqual(read_series_json(path.with_suffix(".json")).n, 300)
        again, _ = self._simulate("again.csv")
        self.assertEqual(file_sha256(path), file_sha256(again))

    def test_simulate_default_location(self):
        code, _, _ = _run(["simulate", "--n", "50", "--output-dir", str(self.tmp / "out"), "-q"])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue((self.tmp / "out" / "data.csv").is_file())

    def test_simulate_rejects_invalid_params(self):
        code, _, err = _run(["simulate", "--alpha", "-0.1", "--output", str(self.tmp / "x.csv")])
        self.assertEqual(code, EXIT_VALIDATION)
        self.assertIn("alpha", err)
        self.assertFalse((self.tmp / "x.csv").exists())
        code, _, err = _run(["simulate", "--alpha", "0.3", "--beta", "0.7", "--output", str(self.tmp / "x.csv")])
        self.assertEqual(code, EXIT_VALIDATION)
        self.assertIn("alpha + beta", err)

    def test_fit_and_diagnose(self):
        data, _ = self._simulate()
        out_dir = self.tmp / "fit"
        code, out, _ = _run(
            ["fit", "--data", str(data), "--sampler", "adaptive", "--output-dir", str(out_dir)]
            + SMALL_CHAIN_ARGS
        )
        self.assertEqual(code, EXIT_OK)
        self.assertIn("adaptive: 1000 samples", out)
        chain = out_dir / "chain_adaptive.csv"
        for name in ("proposal_history.jsonl", "report_adaptive.json"):
            self.assertTrue((out_dir / name).is_file(), name)
        with open(out_dir / "report_adaptive.json") as f:
            fitted = json.load(f)
        self.assertIn(f"acceptance {fitted['acceptance']:.4f}", out)
        self.assertEqual(len(chain.read_text().splitlines()), 1001)

        code, out, _ = _run(
            ["diagnose", "--chain", str(chain), "--name", "rerun", "--figures",
             "--output-dir", str(out_dir), "-q"]
        )
        self.assertEqual(code, EXIT_OK)
        self.assertIn("2tau", out)
        with open(out_dir / "report_rerun.json") as f:
            rerun = json.load(f)
        self.assertEqual(rerun["samples"], 1000)
        self.assertAlmostEqual(rerun["acceptance"], fitted["acceptance"], places=12)
        self.assertTrue((out_dir / "figures" / "acf_rerun_omega.csv").is_file())

    def test_fit_metropolis(self):
        data, _ = self._simulate()
        out_dir = self.tmp / "fit"
        code, _, _ = _run(
            ["fit", "--data", str(data), "--sampler", "metropolis", "--one-at-a-time",
             "--output-dir", str(out_dir)] + SMALL_CHAIN_ARGS
        )
        self.assertEqual(code, EXIT_OK)
        self.assertTrue((out_dir / "chain_metropolis.csv").is_file())
        self.assertFalse((out_dir / "proposal_history.jsonl").exists())

    def test_fit_validation_errors(self):
        code, _, err = _run(["fit", "--data", str(self.tmp / "missing.csv")])
        self.assertEqual(code, EXIT_VALIDATION)
        self.assertIn("not found", err)
        data, _ = self._simulate()
        code, _, err = _run(["fit", "--data", str(data), "--pilot", "3", "--output-dir", str(self.tmp)])
        self.assertEqual(code, EXIT_VALIDATION)
        self.assertIn("pilot", err)
        bad = self.tmp / "bad.csv"
        bad.write_text("0.1\nabc\n")
        code, _, _ = _run(["fit", "--data", str(bad)])
        self.assertEqual(code, EXIT_VALIDATION)

    def test_diagnose_rejects_bad_chain(self):
        bad = self.tmp / "chain.csv"
        bad.write_text("a,b\n1,2\n")
        code, _, _ = _run(["diagnose", "--chain", str(bad), "--output-dir", str(self.tmp)])
        self.assertEqual(code, EXIT_VALIDATION)

    def test_reproduce_table1(self):
        config = self.tmp / "small.yaml"
        config.write_text(SMALL_CONFIG)
        out_dir = self.tmp / "table1"
        code, out, _ = _run(
            ["reproduce-table1", "--config", str(config), "--output-dir", str(out_dir), "-q"]
        )
        self.assertEqual(code, EXIT_OK)
        self.assertIn("adaptive_2tau", out)
        self.assertIn("2tau ratio", out)
        self.assertTrue((out_dir / "table1.csv").is_file())
        self.assertTrue((out_dir / "manifest.json").is_file())

    def test_run_config_helper(self):
        config = self.tmp / "small.yaml"
        config.write_text(SMALL_CONFIG)
        out_dir = self.tmp / "from_helper"
        with contextlib.redirect_stdout(io.StringIO()):
            code = run_config(config, ["--output-dir", str(out_dir), "-q", "--chain-seed", "3"])
        self.assertEqual(code, EXIT_OK)
        self.assertTrue((out_dir / "chain_metropolis.csv").is_file())

    def test_usage_errors(self):
        for args in (
            [],
            ["unknown"],
            ["reproduce-table1", "--no-such-flag"],
            ["reproduce-table1", "--nu", "2"],
            ["fit"],
            ["simulate", "--n", "0"],
        ):
            code, _, _ = _run(args)
            self.assertEqual(code, EXIT_VALIDATION, args)
        code, _, _ = _run(["--help"])
        self.assertEqual(code, EXIT_OK)

    def test_bad_config_file(self):
        config = self.tmp / "bad.yaml"
        config.write_text("analysis_samples: 0\n")
        code, _, err = _run(["reproduce-table1", "--config", str(config), "--output-dir", str(self.tmp)])
        self.assertEqual(code, EXIT_VALIDATION)
        self.assertIn("analysis_samples", err)


if __name__ == "__main__":
    unittest.main()
