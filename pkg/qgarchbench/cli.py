"""
qgarchbench command line.

    qgarchbench simulate --n 2000 --seed 42
    qgarchbench fit --sampler adaptive --data data.csv
    qgarchbench diagnose --chain chain_adaptive.csv
    qgarchbench reproduce-table1 --analysis-samples 5000

Exit codes: 0 on success, 1 on a runtime failure, 2 on invalid input.
"""

import argparse
import logging
import sys

from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy
import tabulate

from qgarchbench.components.diagnostics import summarize
from qgarchbench.components.export import (
    read_chain_csv,
    read_series,
    write_acf_csv,
    write_chain_csv,
    write_histogram_csv,
    write_proposal_history,
    write_series_csv,
    write_series_json,
)
from qgarchbench.experiment import ExperimentConfig, run_chain, run_experiment
from qgarchbench.experiment.runner import format_comparison, TABLE1_HEADER, table1_rows
from qgarchbench.model import PARAM_NAMES, QgarchParams, simulate
from qgarchbench.utils.errors import PhaseError, QgarchBenchError, ValidationError
from qgarchbench.utils.mcmc_op import DEFAULT_WINDOW, window_acceptance
from qgarchbench.utils.parser import get_parser
from qgarchbench.utils.run_utils import setup_output_dir

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def _setup_logging(args: argparse.Namespace) -> None:
    level = logging.INFO
    if getattr(args, "verbose", False):
        level = logging.DEBUG
    elif getattr(args, "quiet", False):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def _chain_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Flat config keys for the chain flags present on the command line."""
    present = vars(args)
    out: Dict[str, Any] = {}
    for key in ("burn_in", "pilot", "refresh", "analysis_samples", "nu", "freeze_after",
                "one_at_a_time", "hist_bins", "acf_t_max"):
        if key in present:
            out[key] = present[key]
    if "burn_in" in present:
        out["metropolis_burn_in"] = present["burn_in"]
    if "analysis_samples" in present:
        out["metropolis_samples"] = present["analysis_samples"]
    if "step_sizes" in present:
        for name, step in zip(PARAM_NAMES, present["step_sizes"]):
            out[f"step_{name}"] = step
    return out


def cmd_simulate(args: argparse.Namespace) -> int:
    params = QgarchParams(args.alpha, args.beta, args.omega, args.gamma).validate()
    series = simulate(params, args.n, args.seed, args.sim_burn_in)
    if args.output:
        path = Path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
    else:
        path = setup_output_dir(args.output_dir) / "data.csv"
    write_series_csv(path, series)
    write_series_json(path.with_suffix(".json"), series)
    print(f"[qgarchbench] wrote {series.n} observations to {path}")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    series = read_series(args.data)
    overrides = _chain_overrides(args)
    overrides["chain_seed"] = args.seed
    config = ExperimentConfig().with_overrides(**overrides)
    output_dir = setup_output_dir(args.output_dir)
    chain, error = run_chain(args.sampler, series, config, progress=args.progress)
    written: List[Path] = []
    if chain is not None and len(chain):
        written.append(write_chain_csv(output_dir / f"chain_{args.sampler}.csv", chain))
    if chain is not None and chain.proposal_history:
        written.append(
            write_proposal_history(
                output_dir / "proposal_history.jsonl", chain.proposal_history, config.config_hash
            )
        )
    if error is not None:
        raise PhaseError(args.sampler, error, written)
    try:
        report = summarize(
            chain.samples,
            chain.param_names,
            sampler_name=args.sampler,
            acceptance_trace=chain.acceptance_trace,
            acceptance=chain.acceptance,
            bins=config.hist_bins,
            t_max=config.acf_t_max,
        )
    except QgarchBenchError as e:
        raise PhaseError("diagnostics", e, written) from e
    with open(output_dir / f"report_{args.sampler}.json", "w") as f:
        report.write_json_to_file(f, config.config_hash)
    print(f"{args.sampler}: {report.n_samples} samples, acceptance {report.acceptance:.4f}")
    print(report)
    return EXIT_OK


def cmd_diagnose(args: argparse.Namespace) -> int:
    samples, _, accepted = read_chain_csv(args.chain)
    name = args.name or Path(args.chain).stem
    report = summarize(
        samples,
        PARAM_NAMES,
        sampler_name=name,
        acceptance_trace=window_acceptance(accepted, DEFAULT_WINDOW),
        acceptance=float(numpy.mean(accepted)),
        bins=args.hist_bins,
        t_max=args.acf_t_max,
    )
    output_dir = setup_output_dir(args.output_dir)
    with open(output_dir / f"report_{name}.json", "w") as f:
        report.write_json_to_file(f)
    if args.figures:
        figures_dir = output_dir / "figures"
        figures_dir.mkdir(exist_ok=True)
        for param in PARAM_NAMES:
            write_acf_csv(figures_dir / f"acf_{name}_{param}.csv", report.acf[param])
            write_histogram_csv(figures_dir / f"histogram_{name}_{param}.csv", report.histograms[param])
    print(report)
    return EXIT_OK


def cmd_reproduce_table1(args: argparse.Namespace) -> int:
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = _chain_overrides(args)
    overrides.update(
        data_seed=args.data_seed,
        chain_seed=args.chain_seed,
        parallel=args.parallel,
        output_dir=args.output_dir,
    )
    if args.metropolis_samples is not None:
        overrides["metropolis_samples"] = args.metropolis_samples
    config = config.with_overrides(**overrides)
    artifacts = run_experiment(config, progress=args.progress)
    print(tabulate.tabulate(table1_rows(config, artifacts.diagnostics), headers=TABLE1_HEADER))
    print()
    print(format_comparison(artifacts.comparison))
    print(f"[qgarchbench] Output result csv to {artifacts.table1}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "reproduce-table1": cmd_reproduce_table1,
}


def run(args: Optional[List[str]] = None) -> int:
    if args is None:
        args = sys.argv[1:]
    parser = get_parser()
    try:
        parsed = parser.parse_args(args)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_VALIDATION
    _setup_logging(parsed)
    try:
        return COMMANDS[parsed.command](parsed)
    except PhaseError as e:
        print(f"qgarchbench: {parsed.command} failed in {e.phase}: {e.cause}", file=sys.stderr)
        for path in e.artifacts:
            logger.info("partial artifact kept: %s", path)
        return EXIT_VALIDATION if e.is_validation else EXIT_RUNTIME
    except ValidationError as e:
        print(f"qgarchbench: {parsed.command}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (QgarchBenchError, OSError) as e:
        print(f"qgarchbench: {parsed.command}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
