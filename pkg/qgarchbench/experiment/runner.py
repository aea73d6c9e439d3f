"""
End-to-end run: simulate one series, run the adaptive sampler and the
Metropolis baseline on it, then write the diagnostics, the table1.csv summary
and the figure data under one output directory.
"""

import logging
import math

from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import tabulate

from qgarchbench.components.diagnostics import (
    DiagnosticsReport,
    overlap_coefficient,
    summarize,
)
from qgarchbench.components.export import (
    read_series_csv,
    series_digest,
    write_acf_csv,
    write_chain_csv,
    write_histogram_csv,
    write_manifest,
    write_proposal_history,
    write_rows_csv,
    write_series_csv,
    write_series_json,
)
from qgarchbench.experiment.config import ExperimentConfig
from qgarchbench.model import PARAM_NAMES, QgarchPosterior, SeriesData, simulate
from qgarchbench.samplers import load_sampler_by_name
from qgarchbench.utils.env_utils import make_chain_rng
from qgarchbench.utils.errors import ComparisonError, PhaseError, QgarchBenchError
from qgarchbench.utils.mcmc_op import ChainResult, TimerContext
from qgarchbench.utils.run_utils import log_peak_memory, setup_output_dir

logger = logging.getLogger(__name__)

SAMPLER_ORDER = ("adaptive", "metropolis")
TABLE1_HEADER = ["row", "alpha", "beta", "omega", "gamma"]


@dataclass(frozen=True)
class EfficiencyRatio:
    name: str
    # two_tau of the baseline over two_tau of the candidate; None if either ACT failed
    ratio: Optional[float]
    error: Optional[float]

    @property
    def available(self) -> bool:
        return self.ratio is not None


@dataclass
class RunArtifacts:
    output_dir: Path
    config_hash: str
    data: Path
    data_json: Optional[Path] = None
    chains: Dict[str, Path] = field(default_factory=OrderedDict)
    reports: Dict[str, Path] = field(default_factory=OrderedDict)
    proposal_history: Optional[Path] = None
    table1: Optional[Path] = None
    figures: List[Path] = field(default_factory=list)
    manifest: Optional[Path] = None
    # in-memory results of the run
    diagnostics: Dict[str, DiagnosticsReport] = field(default_factory=OrderedDict)
    comparison: Dict[str, EfficiencyRatio] = field(default_factory=OrderedDict)

    def files(self) -> List[Path]:
        out = [self.data]
        if self.data_json is not None:
            out.append(self.data_json)
        out.extend(self.chains.values())
        out.extend(self.reports.values())
        for extra in (self.proposal_history, self.table1):
            if extra is not None:
                out.append(extra)
        out.extend(self.figures)
        return out


def compare_efficiency(
    report_a: DiagnosticsReport, report_b: DiagnosticsReport
) -> Dict[str, EfficiencyRatio]:
    """
    Per-parameter two_tau(b) / two_tau(a), with relative errors added in
    quadrature. A parameter whose ACT window did not converge in either
    report gets an unavailable ratio.
    """
    missing = set(report_a.parameters) ^ set(report_b.parameters)
    if missing:
        raise ComparisonError(
            f"Reports do not cover the same parameters: {', '.join(sorted(missing))}"
        )
    out: Dict[str, EfficiencyRatio] = OrderedDict()
    for name, a in report_a.parameters.items():
        b = report_b.parameters[name]
        if not (a.converged and b.converged) or not a.two_tau > 0:
            out[name] = EfficiencyRatio(name=name, ratio=None, error=None)
            continue
        ratio = b.two_tau / a.two_tau
        rel = math.hypot(a.two_tau_err / a.two_tau, b.two_tau_err / b.two_tau)
        out[name] = EfficiencyRatio(name=name, ratio=ratio, error=ratio * rel)
    return out


def format_comparison(comparison: Dict[str, EfficiencyRatio]) -> str:
    table = [
        [c.name, c.ratio if c.available else "n/a", c.error if c.available else "n/a"]
        for c in comparison.values()
    ]
    return tabulate.tabulate(table, headers=["param", "2tau ratio", "error"], floatfmt=".2f")


def _sampler_kwargs(name: str, config: ExperimentConfig) -> Dict[str, Any]:
    if name == "adaptive":
        return {"schedule": config.schedule, "step_sizes": config.metropolis.step_sizes}
    return {"settings": config.metropolis}


def run_chain(
    name: str, series: SeriesData, config: ExperimentConfig, progress: bool = False
) -> Tuple[ChainResult, Optional[QgarchBenchError]]:
    """
    Runs one registered sampler on its own stream. A failure is returned
    next to the partial chain instead of raised, so callers can flush it.
    """
    posterior = QgarchPosterior.from_series(series)
    rng = make_chain_rng(config.chain_seed, name)
    sampler = load_sampler_by_name(name)(
        posterior, rng, progress=progress, **_sampler_kwargs(name, config)
    )
    try:
        return sampler.run(), None
    except QgarchBenchError as e:
        return sampler.output, e


def _run_chains(
    series: SeriesData, config: ExperimentConfig, progress: bool
) -> Dict[str, Tuple[ChainResult, Optional[QgarchBenchError]]]:
    if not config.parallel:
        return OrderedDict((name, run_chain(name, series, config, progress)) for name in SAMPLER_ORDER)
    with ProcessPoolExecutor(max_workers=len(SAMPLER_ORDER)) as pool:
        futures = OrderedDict(
            (name, pool.submit(run_chain, name, series, config)) for name in SAMPLER_ORDER
        )
        return OrderedDict((name, future.result()) for name, future in futures.items())


def _shared_ranges(chains: Dict[str, ChainResult]) -> Dict[str, Tuple[float, float]]:
    ranges = {}
    for j, name in enumerate(PARAM_NAMES):
        lo = min(float(c.samples[:, j].min()) for c in chains.values())
        hi = max(float(c.samples[:, j].max()) for c in chains.values())
        ranges[name] = (lo, hi) if hi > lo else (lo - 0.5, hi + 0.5)
    return ranges


def _fmt(x: Optional[float]) -> str:
    return "" if x is None or not math.isfinite(x) else repr(float(x))


def table1_rows(
    config: ExperimentConfig, reports: Dict[str, DiagnosticsReport]
) -> List[List[str]]:
    rows = [["true"] + [_fmt(v) for v in config.true_params.to_array()]]
    for name in SAMPLER_ORDER:
        params = [reports[name][p] for p in PARAM_NAMES]
        rows.append([name] + [_fmt(s.mean) for s in params])
        rows.append([f"{name}_sd"] + [_fmt(s.sd) for s in params])
        rows.append([f"{name}_se"] + [_fmt(s.se) for s in params])
        rows.append([f"{name}_2tau"] + [_fmt(s.two_tau) for s in params])
        rows.append([f"{name}_2tau_err"] + [_fmt(s.two_tau_err) for s in params])
    return rows


def write_figures(
    figures_dir: Path,
    chains: Dict[str, ChainResult],
    reports: Dict[str, DiagnosticsReport],
) -> List[Path]:
    """Plot-ready CSVs: histograms, traces, ACF curves, V elements and acceptance."""
    written = []
    for sampler, report in reports.items():
        for name in PARAM_NAMES:
            written.append(
                write_histogram_csv(figures_dir / f"histogram_{sampler}_{name}.csv", report.histograms[name])
            )
            written.append(write_acf_csv(figures_dir / f"acf_{sampler}_{name}.csv", report.acf[name]))
        chain = chains[sampler]
        trace_rows = (
            [i + 1] + [repr(float(v)) for v in chain.samples[i]] for i in range(len(chain))
        )
        written.append(
            write_rows_csv(figures_dir / f"trace_{sampler}.csv", ["step"] + list(PARAM_NAMES), trace_rows)
        )
        written.append(
            write_rows_csv(
                figures_dir / f"acceptance_{sampler}.csv",
                ["step", "acceptance"],
                ([step, repr(float(frac))] for step, frac in chain.acceptance_trace),
            )
        )
    history = chains["adaptive"].proposal_history
    if history:
        p = len(history[0]["M"])
        pairs = [(i, j) for i in range(p) for j in range(i, p)]
        header = ["step"] + [f"V_{PARAM_NAMES[i]}_{PARAM_NAMES[j]}" for i, j in pairs]
        rows = (
            [entry["step"]] + [repr(float(entry["V"][i][j])) for i, j in pairs]
            for entry in history
        )
        written.append(write_rows_csv(figures_dir / "proposal_v.csv", header, rows))
    return written


def run_experiment(config: ExperimentConfig, progress: bool = False) -> RunArtifacts:
    config.validate()
    output_dir = setup_output_dir(config.output_dir)
    config = config.with_output_dir(output_dir)
    config_hash = config.config_hash
    config.dump(output_dir / "config.yaml")
    logger.info("[qgarchbench] config hash %s", config_hash)

    # simulate
    try:
        with TimerContext() as timer:
            simulated = simulate(config.true_params, config.n_obs, config.data_seed, config.sim_burn_in)
        logger.info("Took %.02fms to simulate %d observations", timer.elapsed_ms, config.n_obs)
        data_path = write_series_csv(output_dir / "data.csv", simulated)
        data_json = write_series_json(output_dir / "data.json", simulated, config_hash)
        # both chains read the file back, so they see exactly what was written
        series = read_series_csv(data_path)
        if series_digest(series) != series_digest(simulated):
            raise ComparisonError("data.csv does not reproduce the simulated series")
    except QgarchBenchError as e:
        raise PhaseError("simulate", e) from e
    artifacts = RunArtifacts(
        output_dir=output_dir, config_hash=config_hash, data=data_path, data_json=data_json
    )

    # sample
    outcomes = _run_chains(series, config, progress)
    chains: Dict[str, ChainResult] = OrderedDict()
    for name, (chain, error) in outcomes.items():
        if chain is not None and len(chain):
            artifacts.chains[name] = write_chain_csv(output_dir / f"chain_{name}.csv", chain)
        if name == "adaptive" and chain is not None:
            artifacts.proposal_history = write_proposal_history(
                output_dir / "proposal_history.jsonl", chain.proposal_history, config_hash
            )
        if error is not None:
            raise PhaseError(name, error, artifacts.files()) from error
        chains[name] = chain

    # diagnostics
    try:
        ranges = _shared_ranges(chains)
        for name, chain in chains.items():
            report = summarize(
                chain.samples,
                chain.param_names,
                sampler_name=name,
                acceptance_trace=chain.acceptance_trace,
                acceptance=chain.acceptance,
                bins=config.hist_bins,
                t_max=config.acf_t_max,
                hist_ranges=ranges,
            )
            artifacts.diagnostics[name] = report
            path = output_dir / f"report_{name}.json"
            with open(path, "w") as f:
                report.write_json_to_file(f, config_hash)
            artifacts.reports[name] = path
            logger.info("[qgarchbench] %s chain\n%s", name, report)
    except QgarchBenchError as e:
        raise PhaseError("diagnostics", e, artifacts.files()) from e

    # compare
    try:
        adaptive = artifacts.diagnostics["adaptive"]
        baseline = artifacts.diagnostics["metropolis"]
        artifacts.comparison = compare_efficiency(adaptive, baseline)
        logger.info("[qgarchbench] ACT ratio, baseline over adaptive\n%s", format_comparison(artifacts.comparison))
        for name in PARAM_NAMES:
            logger.info(
                "[qgarchbench] %s histogram overlap %.4f",
                name,
                overlap_coefficient(
                    chains["adaptive"].column(name), chains["metropolis"].column(name), config.hist_bins
                ),
            )
        artifacts.table1 = write_rows_csv(
            output_dir / "table1.csv", TABLE1_HEADER, table1_rows(config, artifacts.diagnostics)
        )
        figures_dir = output_dir / "figures"
        figures_dir.mkdir(exist_ok=True)
        artifacts.figures = write_figures(figures_dir, chains, artifacts.diagnostics)
    except QgarchBenchError as e:
        raise PhaseError("compare", e, artifacts.files()) from e

    artifacts.manifest = write_manifest(output_dir / "manifest.json", config_hash, artifacts.files())
    log_peak_memory("experiment done")
    return artifacts
