"""
Adaptive independence sampler.

Protocol: Metropolis warm-up (discarded), a Metropolis pilot whose samples
seed the first Student's t fit, then independence MH with the proposal
re-fitted every `refresh` steps from all post-warm-up samples so far.
"""

import logging

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Union

import numpy

from qgarchbench.components.moments import MomentAccumulator
from qgarchbench.components.proposal import (
    DEFAULT_NU,
    fit_from_accumulator,
    ProposalSpec,
)
from qgarchbench.model import QgarchPosterior, SeriesData
from qgarchbench.samplers.kernels import adaptive_mh_step, metropolis_step
from qgarchbench.utils.errors import ConfigError
from qgarchbench.utils.mcmc_op import (
    ChainResult,
    ChainSampler,
    DEFAULT_BURN_IN,
    DEFAULT_STEP_SIZES,
    register_sampler,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdaptationSchedule:
    burn_in: int = DEFAULT_BURN_IN
    pilot: int = 1000
    refresh: int = 1000
    analysis_samples: int = 100000
    nu: float = DEFAULT_NU
    # last adaptive step at which the proposal may still be re-fitted
    freeze_after: Optional[int] = None

    def validate(self) -> "AdaptationSchedule":
        if self.burn_in < 0:
            raise ConfigError(f"burn_in must be >= 0, got {self.burn_in}")
        for name in ("pilot", "refresh", "analysis_samples"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.nu > 2:
            raise ConfigError(f"nu must be > 2, got {self.nu}")
        if self.freeze_after is not None and self.freeze_after < 0:
            raise ConfigError(f"freeze_after must be >= 0, got {self.freeze_after}")
        return self

    def may_refit(self, step: int) -> bool:
        return self.freeze_after is None or step <= self.freeze_after


@register_sampler("adaptive", label="Adaptive")
class Sampler(ChainSampler):
    def __init__(
        self,
        posterior: QgarchPosterior,
        rng: numpy.random.Generator,
        schedule: AdaptationSchedule = AdaptationSchedule(),
        step_sizes: Sequence[float] = DEFAULT_STEP_SIZES,
        progress: bool = False,
        initial: Optional[numpy.ndarray] = None,
    ):
        self.schedule = schedule.validate()
        if schedule.pilot < posterior.dim + 1:
            raise ConfigError(
                f"pilot must be at least {posterior.dim + 1} for a full-rank first fit, "
                f"got {schedule.pilot}"
            )
        super().__init__(
            posterior,
            rng,
            step_sizes=step_sizes,
            burn_in=schedule.burn_in,
            window=schedule.refresh,
            progress=progress,
            initial=initial,
        )
        self.spec: Optional[ProposalSpec] = None

    def _history_entry(
        self, step: int, acc: MomentAccumulator, window: Optional[float], frozen: bool
    ) -> Dict[str, Any]:
        entry = {"step": step, "samples": acc.count}
        entry.update(self.spec.as_dict())
        entry["acceptance_window"] = window
        entry["frozen"] = frozen
        return entry

    def _sample(self) -> None:
        schedule = self.schedule
        state = self.warm_up()

        pilot = numpy.empty((schedule.pilot, self.posterior.dim))
        for i in self._range(schedule.pilot, "adaptive pilot"):
            state = metropolis_step(state, self.step_sizes, self.rng, self.posterior)
            pilot[i] = state.theta
        acc = MomentAccumulator(dim=self.posterior.dim).absorb(pilot)
        self.spec = fit_from_accumulator(acc, schedule.nu)
        self._proposal_history.append(self._history_entry(0, acc, None, False))

        self._allocate(schedule.analysis_samples)
        for i in self._range(schedule.analysis_samples, "adaptive"):
            accepts = state.accepts
            state = adaptive_mh_step(state, self.spec, self.rng, self.posterior)
            self._record(state, state.accepts > accepts)
            step = i + 1
            if step % schedule.refresh:
                continue
            window = self._acceptance_trace[-1][1]
            frozen = not schedule.may_refit(step)
            if not frozen:
                acc.absorb(self._samples[step - schedule.refresh : step])
                self.spec = fit_from_accumulator(acc, schedule.nu)
            logger.debug(
                "step %d: window acceptance %.3f, %s", step, window, "frozen" if frozen else "re-fitted"
            )
            self._proposal_history.append(self._history_entry(step, acc, window, frozen))


def run_adaptive_chain(
    y: Union[SeriesData, QgarchPosterior],
    schedule: AdaptationSchedule,
    rng: numpy.random.Generator,
    step_sizes: Sequence[float] = DEFAULT_STEP_SIZES,
    progress: bool = False,
) -> ChainResult:
    posterior = y if isinstance(y, QgarchPosterior) else QgarchPosterior.from_series(y)
    return Sampler(
        posterior, rng, schedule=schedule, step_sizes=step_sizes, progress=progress
    ).run()
