import logging

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy

from qgarchbench.model import QgarchPosterior, SeriesData
from qgarchbench.samplers.kernels import metropolis_step, metropolis_sweep
from qgarchbench.utils.errors import ConfigError
from qgarchbench.utils.mcmc_op import (
    ChainResult,
    ChainSampler,
    DEFAULT_BURN_IN,
    DEFAULT_STEP_SIZES,
    DEFAULT_WINDOW,
    register_sampler,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetropolisSettings:
    step_sizes: Tuple[float, ...] = DEFAULT_STEP_SIZES
    burn_in: int = DEFAULT_BURN_IN
    samples: int = 100000
    # update one component at a time instead of all jointly
    one_at_a_time: bool = False
    window: int = DEFAULT_WINDOW

    def validate(self) -> "MetropolisSettings":
        if self.burn_in < 0:
            raise ConfigError(f"metropolis burn_in must be >= 0, got {self.burn_in}")
        if self.samples <= 0:
            raise ConfigError(f"metropolis samples must be > 0, got {self.samples}")
        if self.window <= 0:
            raise ConfigError(f"window must be > 0, got {self.window}")
        if not all(s > 0 for s in self.step_sizes):
            raise ConfigError(f"step sizes must be > 0, got {self.step_sizes}")
        return self


@register_sampler("metropolis", baseline=True, label="Metropolis")
class Sampler(ChainSampler):
    """Random-walk Metropolis baseline with uniform per-component proposals."""

    def __init__(
        self,
        posterior: QgarchPosterior,
        rng: numpy.random.Generator,
        settings: MetropolisSettings = MetropolisSettings(),
        progress: bool = False,
        initial: Optional[numpy.ndarray] = None,
    ):
        self.settings = settings.validate()
        super().__init__(
            posterior,
            rng,
            step_sizes=settings.step_sizes,
            burn_in=settings.burn_in,
            window=settings.window,
            progress=progress,
            initial=initial,
        )

    def _sample(self) -> None:
        kernel = metropolis_sweep if self.settings.one_at_a_time else metropolis_step
        # a sweep makes one proposal per component
        proposals = self.posterior.dim if self.settings.one_at_a_time else 1
        state = self.warm_up()
        self._allocate(self.settings.samples)
        for _ in self._range(self.settings.samples, "metropolis"):
            accepts = state.accepts
            state = kernel(state, self.step_sizes, self.rng, self.posterior)
            self._record(state, (state.accepts - accepts) / proposals)


def run_metropolis_chain(
    y: Union[SeriesData, QgarchPosterior],
    settings: MetropolisSettings,
    rng: numpy.random.Generator,
    progress: bool = False,
) -> ChainResult:
    posterior = y if isinstance(y, QgarchPosterior) else QgarchPosterior.from_series(y)
    return Sampler(posterior, rng, settings=settings, progress=progress).run()
