import json
import logging
import math

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy
import tabulate

from qgarchbench.model import PARAM_NAMES, QgarchParams
from qgarchbench.utils.errors import ValidationError

from .acf import acf, act_window, AcfSeries, batch_means_error, DEFAULT_WINDOW_C

logger = logging.getLogger(__name__)

MIN_CHAIN_LENGTH = 100
DEFAULT_HIST_BINS = 50
# batch length in units of tau for the batch-means cross-check
BATCH_TAU_MULTIPLE = 20


def _json_float(x: Optional[float]) -> Optional[float]:
    if x is None or not math.isfinite(x):
        return None
    return float(x)


@dataclass(frozen=True)
class Histogram:
    edges: numpy.ndarray
    counts: numpy.ndarray

    def rows(self):
        for left, right, count in zip(self.edges[:-1], self.edges[1:], self.counts):
            yield [repr(float(left)), repr(float(right)), int(count)]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def histogram(
    series: Sequence[float],
    bins: int = DEFAULT_HIST_BINS,
    range: Optional[Tuple[float, float]] = None,
) -> Histogram:
    """Equal-width bins over [min, max] unless a shared `range` is given."""
    x = numpy.asarray(series, dtype=numpy.float64)
    if bins < 2:
        raise ValidationError(f"bins must be >= 2, got {bins}")
    if x.size == 0:
        raise ValidationError("Cannot histogram an empty series.")
    if range is not None:
        # values outside a shared range still land in the edge bins
        x = numpy.clip(x, range[0], range[1])
    counts, edges = numpy.histogram(x, bins=bins, range=range)
    return Histogram(edges=edges, counts=counts)


def overlap_coefficient(a: Sequence[float], b: Sequence[float], bins: int = DEFAULT_HIST_BINS) -> float:
    """Shared area of two normalised histograms on a common grid, in [0, 1]."""
    a = numpy.asarray(a, dtype=numpy.float64)
    b = numpy.asarray(b, dtype=numpy.float64)
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if not hi > lo:
        return 1.0
    ha = histogram(a, bins, (lo, hi)).counts / a.size
    hb = histogram(b, bins, (lo, hi)).counts / b.size
    return float(numpy.minimum(ha, hb).sum())


@dataclass(frozen=True)
class ParameterSummary:
    name: str
    mean: float
    sd: float
    # sd * sqrt(2 tau / k)
    se: float
    two_tau: float
    two_tau_err: float
    window: int
    converged: bool
    negative_window_sum: bool
    se_batch: Optional[float] = None

    def as_dict(self) -> Dict[str, Any]:
        return {
            "mean": _json_float(self.mean),
            "sd": _json_float(self.sd),
            "se": _json_float(self.se),
            "se_batch": _json_float(self.se_batch),
            "two_tau": _json_float(self.two_tau),
            "two_tau_err": _json_float(self.two_tau_err),
            "window": self.window,
            "converged": self.converged,
            "negative_window_sum": self.negative_window_sum,
        }


@dataclass
class DiagnosticsReport:
    sampler_name: str
    n_samples: int
    parameters: Dict[str, ParameterSummary] = field(default_factory=OrderedDict)
    acf: Dict[str, AcfSeries] = field(default_factory=OrderedDict)
    histograms: Dict[str, Histogram] = field(default_factory=OrderedDict)
    acceptance_trace: List[Tuple[int, float]] = field(default_factory=list)
    # overall fraction of accepted proposals over the retained chain
    acceptance: Optional[float] = None

    def __getitem__(self, name: str) -> ParameterSummary:
        return self.parameters[name]

    def as_dict(self, config_hash: Optional[str] = None) -> Dict[str, Any]:
        out: Dict[str, Any] = OrderedDict()
        if config_hash is not None:
            out["config_hash"] = config_hash
        out["sampler"] = self.sampler_name
        out["samples"] = self.n_samples
        out["acceptance"] = _json_float(self.acceptance)
        out["parameters"] = {
            name: summary.as_dict() for name, summary in self.parameters.items()
        }
        out["acceptance_trace"] = [
            {"step": step, "acceptance": _json_float(frac)}
            for step, frac in self.acceptance_trace
        ]
        return out

    def write_json_to_file(self, fileobj, config_hash: Optional[str] = None):
        json.dump(self.as_dict(config_hash), fileobj, indent=4)
        fileobj.write("\n")

    def _table(self):
        headers = ["param", "mean", "sd", "se", "se_batch", "2tau", "2tau_err", "W"]
        table = []
        for name, s in self.parameters.items():
            flag = "" if s.converged else "*"
            table.append(
                [name, s.mean, s.sd, s.se, s.se_batch, s.two_tau, s.two_tau_err, f"{s.window}{flag}"]
            )
        return headers, table

    def __str__(self):
        headers, table = self._table()
        return tabulate.tabulate(table, headers=headers, floatfmt=".5g")


def _as_matrix(
    chain: Union[numpy.ndarray, Sequence[QgarchParams]], param_names: Optional[Sequence[str]]
) -> Tuple[numpy.ndarray, Tuple[str, ...]]:
    if len(chain) and isinstance(chain[0], QgarchParams):
        samples = numpy.stack([p.to_array() for p in chain])
        return samples, tuple(PARAM_NAMES)
    samples = numpy.asarray(chain, dtype=numpy.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    names = tuple(param_names) if param_names is not None else tuple(PARAM_NAMES[: samples.shape[1]])
    if samples.ndim != 2 or samples.shape[1] != len(names):
        raise ValidationError(
            f"Chain of shape {samples.shape} does not match parameters {names}"
        )
    return samples, names


def summarize_parameter(
    name: str, x: numpy.ndarray, t_max: Optional[int] = None, c: float = DEFAULT_WINDOW_C
) -> Tuple[ParameterSummary, AcfSeries]:
    k = x.size
    series = acf(x, t_max)
    window = act_window(series, c)
    if not window.converged:
        logger.warning(
            "[qgarchbench] %s: no self-consistent ACT window below lag %d", name, series.t_max
        )
    if window.negative_sum:
        logger.warning("[qgarchbench] %s: negative windowed ACF sum, tau=%.4f", name, window.tau)
    sd = float(numpy.std(x, ddof=1))
    se = sd * math.sqrt(2.0 * window.tau / k) if window.tau > 0 else math.nan
    try:
        batch = max(1, math.ceil(BATCH_TAU_MULTIPLE * window.tau))
        se_batch = batch_means_error(x, batch)
    except ValidationError:
        se_batch = None
    summary = ParameterSummary(
        name=name,
        mean=float(numpy.mean(x)),
        sd=sd,
        se=se,
        two_tau=2.0 * window.tau,
        two_tau_err=2.0 * window.tau_error,
        window=window.window,
        converged=window.converged,
        negative_window_sum=window.negative_sum,
        se_batch=se_batch,
    )
    return summary, series


def summarize(
    chain: Union[numpy.ndarray, Sequence[QgarchParams]],
    param_names: Optional[Sequence[str]] = None,
    sampler_name: str = "chain",
    acceptance_trace: Optional[List[Tuple[int, float]]] = None,
    acceptance: Optional[float] = None,
    bins: int = DEFAULT_HIST_BINS,
    t_max: Optional[int] = None,
    hist_ranges: Optional[Mapping[str, Tuple[float, float]]] = None,
    c: float = DEFAULT_WINDOW_C,
) -> DiagnosticsReport:
    """
    Mean, sd, 2tau with its windowed error and se = sd * sqrt(2 tau / k) for
    every column of a (k, p) chain. A zero-variance column is rejected; a
    missing ACT window is reported on the summary, not raised.
    """
    samples, names = _as_matrix(chain, param_names)
    k = samples.shape[0]
    if k < MIN_CHAIN_LENGTH:
        raise ValidationError(f"Need a chain of at least {MIN_CHAIN_LENGTH} samples, got {k}")
    report = DiagnosticsReport(
        sampler_name=sampler_name,
        n_samples=k,
        acceptance_trace=list(acceptance_trace or []),
        acceptance=acceptance,
    )
    for j, name in enumerate(names):
        x = samples[:, j]
        try:
            summary, series = summarize_parameter(name, x, t_max, c)
        except ValidationError as e:
            raise ValidationError(f"{name}: {e}") from e
        report.parameters[name] = summary
        report.acf[name] = series
        hist_range = hist_ranges.get(name) if hist_ranges else None
        report.histograms[name] = histogram(x, bins, hist_range)
    return report
