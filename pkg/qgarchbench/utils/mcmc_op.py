import csv
import logging
import math
import time

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy
import tabulate

from qgarchbench.model import PARAM_NAMES, QgarchPosterior
from qgarchbench.samplers.kernels import ChainState, metropolis_step
from qgarchbench.utils.errors import SamplerError

try:
    from tqdm import tqdm
except ImportError:
    tqdm = None

logger = logging.getLogger(__name__)

DEFAULT_BURN_IN = 3000
DEFAULT_WINDOW = 1000
# uniform half-widths for (alpha, beta, omega, gamma)
DEFAULT_STEP_SIZES = (0.01, 0.02, 0.01, 0.01)
CHAIN_CSV_HEADER = ["step", "alpha", "beta", "omega", "gamma", "log_post", "accepted"]


@dataclass
class SamplerBackend:
    # sampler name
    name: str
    # sampler label
    label: str
    # baseline
    baseline: bool = False


REGISTERED_SAMPLERS: Dict[str, SamplerBackend] = OrderedDict()


class TimerContext:
    def __init__(self, enabled=True):
        self.enabled = enabled
        self.elapsed_ms = None

    def __enter__(self):
        if self.enabled:
            self._start_time = time.perf_counter()
        return self

    def __exit__(self, *args, **kwargs):
        if self.enabled:
            end_time = time.perf_counter()
            self.elapsed_ms = (end_time - self._start_time) * 1e3


def register_sampler(name: str, baseline: bool = False, label: Optional[str] = None):
    def decorator(cls):
        REGISTERED_SAMPLERS[name] = SamplerBackend(
            name=name, label=label if label else name, baseline=baseline
        )
        cls.name = name
        return cls

    return decorator


def window_acceptance(accepted: numpy.ndarray, window: int) -> List[Tuple[int, float]]:
    """Acceptance of each completed window, computed from that window only."""
    trace = []
    for end in range(window, accepted.size + 1, window):
        trace.append((end, float(numpy.mean(accepted[end - window : end]))))
    return trace


def _accept_cell(value: float) -> Union[int, str]:
    value = float(value)
    return int(value) if value.is_integer() else repr(value)


@dataclass
class ChainResult:
    sampler_name: str
    param_names: Tuple[str, ...]
    # (k, p) samples over the free parameters
    samples: numpy.ndarray
    log_post: numpy.ndarray
    # fraction of proposals accepted at each recorded step
    accepted: numpy.ndarray
    acceptance_trace: List[Tuple[int, float]] = field(default_factory=list)
    # one entry per refresh: step, M, Sigma, V, acceptance_window
    proposal_history: List[Dict[str, Any]] = field(default_factory=list)
    warmup_acceptance: Optional[float] = None
    complete: bool = True

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def acceptance(self) -> float:
        return float(numpy.mean(self.accepted)) if len(self) else math.nan

    def column(self, name: str) -> numpy.ndarray:
        return self.samples[:, self.param_names.index(name)]

    def _rows(self, expand: Optional[Callable[[numpy.ndarray], numpy.ndarray]] = None):
        full = expand(self.samples) if expand is not None else self.samples
        for i in range(len(self)):
            yield [i + 1] + [repr(float(v)) for v in full[i]] + [
                repr(float(self.log_post[i])),
                _accept_cell(self.accepted[i]),
            ]

    def write_csv_to_file(self, fileobj, posterior: Optional[QgarchPosterior] = None):
        """Chain CSV with the full (alpha, beta, omega, gamma) columns."""
        if posterior is None and len(self.param_names) != len(PARAM_NAMES):
            raise ValueError("A restricted chain needs its posterior to expand the columns.")
        writer = csv.writer(fileobj, lineterminator="\n")
        writer.writerow(CHAIN_CSV_HEADER)
        writer.writerows(self._rows(posterior.expand_many if posterior is not None else None))

    def _table(self):
        headers = ["sampler", "samples", "acceptance", "refits", "complete"]
        row = [
            self.sampler_name,
            len(self),
            self.acceptance,
            len(self.proposal_history),
            self.complete,
        ]
        return headers, [row]

    def __str__(self):
        headers, table = self._table()
        return tabulate.tabulate(table, headers=headers, floatfmt=".4f")


class ChainSampler:
    """
    A base class for the registered samplers. Subclasses implement `_sample`;
    `run` always leaves whatever was produced on `self.output`, even when the
    chain fails part way.
    """

    name: str = "base"

    def __init__(
        self,
        posterior: QgarchPosterior,
        rng: numpy.random.Generator,
        step_sizes: Sequence[float] = DEFAULT_STEP_SIZES,
        burn_in: int = DEFAULT_BURN_IN,
        window: int = DEFAULT_WINDOW,
        progress: bool = False,
        initial: Optional[numpy.ndarray] = None,
    ):
        self.posterior = posterior
        self.rng = rng
        steps = numpy.asarray(step_sizes, dtype=numpy.float64)
        if steps.size == len(PARAM_NAMES) and posterior.dim < len(PARAM_NAMES):
            # full-model step sizes given for a restricted posterior
            steps = posterior.select(steps)
        if steps.size != posterior.dim:
            raise ValueError(f"Expected {posterior.dim} step sizes, got {steps.size}")
        self.step_sizes = steps
        if not numpy.all(self.step_sizes > 0):
            raise ValueError("Step sizes must be positive.")
        self.burn_in = burn_in
        self.window = window
        self.progress = progress
        self.initial = (
            posterior.initial_point()
            if initial is None
            else numpy.asarray(initial, dtype=numpy.float64)
        )
        self.warmup_acceptance: Optional[float] = None
        self.output: Optional[ChainResult] = None
        self._samples = numpy.empty((0, posterior.dim))
        self._log_post = numpy.empty(0)
        self._accepted = numpy.empty(0)
        self._filled = 0
        self._proposal_history: List[Dict[str, Any]] = []
        self._acceptance_trace: List[Tuple[int, float]] = []

    def _allocate(self, k: int) -> None:
        self._samples = numpy.empty((k, self.posterior.dim))
        self._log_post = numpy.empty(k)
        self._accepted = numpy.zeros(k)
        self._filled = 0

    def _record(self, state: ChainState, accepted: float) -> None:
        """`accepted` is the fraction of proposals taken in this step, 0 or 1 for a single update."""
        i = self._filled
        self._samples[i] = state.theta
        self._log_post[i] = state.log_post
        self._accepted[i] = accepted
        self._filled += 1
        if self._filled % self.window == 0:
            frac = float(numpy.mean(self._accepted[self._filled - self.window : self._filled]))
            self._acceptance_trace.append((self._filled, frac))

    def _range(self, n: int, desc: str):
        if self.progress and tqdm is not None:
            return tqdm(range(n), desc=desc)
        return range(n)

    def initial_state(self) -> ChainState:
        theta = self.initial.copy()
        return ChainState(theta=theta, log_post=self.posterior(theta))

    def warm_up(self) -> ChainState:
        """Metropolis burn-in; the visited points are discarded."""
        state = self.initial_state()
        for _ in self._range(self.burn_in, f"{self.name} warm-up"):
            state = metropolis_step(state, self.step_sizes, self.rng, self.posterior)
        if not math.isfinite(state.log_post):
            raise SamplerError(
                f"Warm-up of {self.burn_in} steps never left the inadmissible region."
            )
        self.warmup_acceptance = state.acceptance
        logger.info(
            "[qgarchbench] %s warm-up done: %d steps, acceptance %.3f",
            self.name,
            self.burn_in,
            self.warmup_acceptance if self.burn_in else math.nan,
        )
        # counters restart so they describe the retained chain only
        return ChainState(theta=state.theta, log_post=state.log_post)

    def _sample(self) -> None:
        raise NotImplementedError("Each sampler must implement its own sampling loop.")

    def run(self) -> ChainResult:
        try:
            with TimerContext() as timer:
                self._sample()
            logger.info("Took %.02fms to run the %s chain", timer.elapsed_ms, self.name)
        except (KeyboardInterrupt, Exception):
            logger.warning(
                "Caught exception, terminating early with partial results",
                exc_info=True,
            )
            raise
        finally:
            k = self._filled
            self.output = ChainResult(
                sampler_name=self.name,
                param_names=self.posterior.free,
                samples=self._samples[:k].copy(),
                log_post=self._log_post[:k].copy(),
                accepted=self._accepted[:k].copy(),
                acceptance_trace=list(self._acceptance_trace),
                proposal_history=list(self._proposal_history),
                warmup_acceptance=self.warmup_acceptance,
                complete=k == self._samples.shape[0] and k > 0,
            )
        return self.output
