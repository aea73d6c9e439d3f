"""
QGARCH(1,1) model: parameters, series containers, simulation and the
log-posterior under a flat prior.

    y_t       = sigma_t * eps_t,  eps_t ~ N(0, 1)
    sigma_t^2 = omega + gamma * y_{t-1} + alpha * y_{t-1}^2 + beta * sigma_{t-1}^2

Parameter vectors and matrices always use the order (alpha, beta, omega, gamma).
"""

import logging
import math

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy
from scipy.integrate import trapezoid
from scipy.signal import lfilter

from qgarchbench.utils.env_utils import make_data_rng
from qgarchbench.utils.errors import (
    InvalidParamsError,
    SimulationError,
    ValidationError,
)

logger = logging.getLogger(__name__)

PARAM_NAMES: Tuple[str, ...] = ("alpha", "beta", "omega", "gamma")
LOG_2PI = math.log(2.0 * math.pi)
DEFAULT_SIM_BURN_IN = 500


@dataclass(frozen=True)
class QgarchParams:
    alpha: float
    beta: float
    omega: float
    gamma: float

    def to_array(self) -> numpy.ndarray:
        return numpy.array(
            [self.alpha, self.beta, self.omega, self.gamma], dtype=numpy.float64
        )

    @classmethod
    def from_array(cls, theta: Iterable[float]) -> "QgarchParams":
        values = [float(x) for x in theta]
        if len(values) != len(PARAM_NAMES):
            raise ValueError(f"Expected {len(PARAM_NAMES)} values, got {len(values)}.")
        return cls(*values)

    def as_dict(self) -> Dict[str, float]:
        return {name: float(getattr(self, name)) for name in PARAM_NAMES}

    @classmethod
    def from_dict(cls, values: Mapping[str, Any]) -> "QgarchParams":
        return cls(**{name: float(values[name]) for name in PARAM_NAMES})

    def is_admissible(self) -> bool:
        """Flat-prior support: alpha >= 0, beta >= 0, omega > 0, gamma free."""
        return self.alpha >= 0 and self.beta >= 0 and self.omega > 0

    def validate(self) -> "QgarchParams":
        for name in PARAM_NAMES:
            if not math.isfinite(getattr(self, name)):
                raise InvalidParamsError(f"{name} must be finite, got {getattr(self, name)}")
        if self.alpha < 0:
            raise InvalidParamsError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0:
            raise InvalidParamsError(f"beta must be >= 0, got {self.beta}")
        if self.omega <= 0:
            raise InvalidParamsError(f"omega must be > 0, got {self.omega}")
        return self

    @property
    def persistence(self) -> float:
        return self.alpha + self.beta

    def unconditional_variance(self) -> float:
        if self.persistence >= 1:
            raise InvalidParamsError(
                f"alpha + beta must be < 1 for a stationary start, got {self.persistence}"
            )
        return self.omega / (1.0 - self.persistence)


DEFAULT_TRUE_PARAMS = QgarchParams(alpha=0.07, beta=0.8, omega=0.1, gamma=-0.05)


@dataclass(frozen=True, eq=False)
class SeriesData:
    y: numpy.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        y = numpy.ascontiguousarray(numpy.asarray(self.y, dtype=numpy.float64))
        if y.ndim != 1:
            raise ValidationError(f"Observations must be one-dimensional, got shape {y.shape}")
        if y.size < 1:
            raise ValidationError("Observations must not be empty.")
        if not numpy.all(numpy.isfinite(y)):
            raise ValidationError("Observations must be finite (no NaN/Inf).")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.y.size)

    def __len__(self) -> int:
        return self.n

    def sample_variance(self) -> float:
        if self.n < 2:
            raise ValidationError("Sample variance needs at least 2 observations.")
        return float(numpy.var(self.y))


@dataclass(frozen=True, eq=False)
class VariancePath:
    sigma2: numpy.ndarray

    def __len__(self) -> int:
        return int(self.sigma2.size)


def _recursion(
    alpha: float,
    beta: float,
    omega: float,
    gamma: float,
    y: numpy.ndarray,
    sigma2_init: float,
) -> numpy.ndarray:
    # sigma2[t] = c[t-1] + beta * sigma2[t-1] is a first-order IIR filter
    sigma2 = numpy.empty_like(y)
    sigma2[0] = sigma2_init
    if y.size > 1:
        prev = y[:-1]
        drive = omega + gamma * prev + alpha * prev * prev
        sigma2[1:], _ = lfilter([1.0], [1.0, -beta], drive, zi=[beta * sigma2_init])
    return sigma2


def variance_recursion(
    params: QgarchParams, y: SeriesData, sigma2_init: float
) -> VariancePath:
    """
    Conditional variance path for the observations. Total: non-positive
    entries are returned as they are, admissibility is the caller's call.
    """
    if not sigma2_init > 0:
        raise ValidationError(f"sigma2_init must be > 0, got {sigma2_init}")
    sigma2 = _recursion(params.alpha, params.beta, params.omega, params.gamma, y.y, sigma2_init)
    return VariancePath(sigma2=sigma2)


def log_posterior_array(theta: numpy.ndarray, y: numpy.ndarray, sigma2_init: float) -> float:
    """Hot-path form of evaluate_log_posterior on a raw (alpha, beta, omega, gamma) vector."""
    alpha, beta, omega, gamma = theta[0], theta[1], theta[2], theta[3]
    # written so that NaN components also land on -inf
    if not (alpha >= 0 and beta >= 0 and omega > 0 and math.isfinite(gamma)):
        return -math.inf
    with numpy.errstate(over="ignore", invalid="ignore", divide="ignore"):
        sigma2 = _recursion(alpha, beta, omega, gamma, y, sigma2_init)
        if not numpy.all(sigma2 > 0):
            return -math.inf
        value = -0.5 * float(numpy.sum(LOG_2PI + numpy.log(sigma2) + y * y / sigma2))
    if math.isnan(value):
        return -math.inf
    return value


def evaluate_log_posterior(params: QgarchParams, y: SeriesData, sigma2_init: float) -> float:
    """
    Sum of Gaussian log-densities N(y_t; 0, sigma_t^2) under a flat prior.
    Returns -inf for parameters outside the prior support or when any
    sigma_t^2 <= 0.
    """
    return log_posterior_array(params.to_array(), y.y, sigma2_init)


def simulate(
    params: QgarchParams,
    n: int,
    seed: int,
    burn_in: int = DEFAULT_SIM_BURN_IN,
) -> SeriesData:
    """
    Generate n observations after discarding burn_in steps. The recursion
    starts from the unconditional variance omega / (1 - alpha - beta).
    """
    params.validate()
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if burn_in < 0:
        raise ValidationError(f"burn_in must be >= 0, got {burn_in}")
    sigma2 = params.unconditional_variance()
    rng = make_data_rng(seed)
    eps = rng.standard_normal(n + burn_in)
    out = numpy.empty(n + burn_in, dtype=numpy.float64)
    alpha, beta, omega, gamma = params.alpha, params.beta, params.omega, params.gamma
    y_prev = None
    for t in range(n + burn_in):
        if y_prev is not None:
            sigma2 = omega + gamma * y_prev + alpha * y_prev * y_prev + beta * sigma2
            if not sigma2 > 0:
                raise SimulationError(
                    f"sigma^2 = {sigma2} <= 0 at step {t}; gamma is too large relative to omega"
                )
        y_prev = math.sqrt(sigma2) * eps[t]
        out[t] = y_prev
    logger.debug("Simulated %d observations (%d burn-in discarded)", n, burn_in)
    return SeriesData(
        y=out[burn_in:],
        meta={"seed": int(seed), "burn_in": int(burn_in), "params": params.as_dict()},
    )


@dataclass(frozen=True, eq=False)
class QgarchPosterior:
    """
    Log-posterior over the free parameters, with the remaining ones pinned
    to the values in `fixed`. The full model has every parameter free.
    """

    series: SeriesData
    sigma2_init: float
    free: Tuple[str, ...] = PARAM_NAMES
    fixed: Optional[QgarchParams] = None

    def __post_init__(self):
        unknown = [name for name in self.free if name not in PARAM_NAMES]
        if unknown or not self.free:
            raise ValidationError(f"Invalid free parameter set {self.free}.")
        if len(self.free) < len(PARAM_NAMES) and self.fixed is None:
            raise ValidationError("Fixed parameter values are required for a restricted posterior.")
        if not self.sigma2_init > 0:
            raise ValidationError(f"sigma2_init must be > 0, got {self.sigma2_init}")
        # canonical order keeps reduce/expand consistent
        free = tuple(name for name in PARAM_NAMES if name in self.free)
        object.__setattr__(self, "free", free)
        object.__setattr__(
            self, "_free_idx", numpy.array([PARAM_NAMES.index(n) for n in free])
        )
        base = self.fixed.to_array() if self.fixed is not None else numpy.zeros(len(PARAM_NAMES))
        object.__setattr__(self, "_base", base)

    @classmethod
    def from_series(
        cls,
        series: SeriesData,
        free: Sequence[str] = PARAM_NAMES,
        fixed: Optional[QgarchParams] = None,
    ) -> "QgarchPosterior":
        """Inference convention: sigma_1^2 is the sample variance of y."""
        return cls(series=series, sigma2_init=series.sample_variance(), free=tuple(free), fixed=fixed)

    @property
    def dim(self) -> int:
        return len(self.free)

    def expand(self, theta: numpy.ndarray) -> numpy.ndarray:
        full = self._base.copy()
        full[self._free_idx] = theta
        return full

    def expand_many(self, samples: numpy.ndarray) -> numpy.ndarray:
        full = numpy.tile(self._base, (samples.shape[0], 1))
        full[:, self._free_idx] = samples
        return full

    def select(self, full: numpy.ndarray) -> numpy.ndarray:
        return numpy.asarray(full, dtype=numpy.float64)[self._free_idx]

    def reduce(self, params: QgarchParams) -> numpy.ndarray:
        return self.select(params.to_array())

    def __call__(self, theta: numpy.ndarray) -> float:
        return log_posterior_array(self.expand(theta), self.series.y, self.sigma2_init)

    def initial_point(self) -> numpy.ndarray:
        """alpha=0.05, beta=0.5, omega=0.5*Var(y)*(1-alpha-beta), gamma=0, pinned values kept."""
        alpha, beta = 0.05, 0.5
        start = QgarchParams(
            alpha=alpha,
            beta=beta,
            omega=0.5 * self.series.sample_variance() * (1.0 - alpha - beta),
            gamma=0.0,
        )
        return self.reduce(start)


def omega_profile_posterior_mean(
    series: SeriesData, sigma2_init: float, grid_size: int = 200001
) -> Tuple[float, float]:
    """
    Posterior mean and SD of omega for the model with alpha=beta=gamma=0,
    by dense quadrature of the exact 1-D posterior.
    """
    y = series.y
    if y.size < 5:
        raise ValidationError("The omega posterior needs at least 5 observations to be proper.")
    # sigma_1^2 is pinned, so only t >= 2 depends on omega
    s = float(numpy.sum(y[1:] ** 2))
    m = y.size - 1
    mode = s / m
    spread = mode * math.sqrt(2.0 / m)
    lo = max(mode * 1e-6, mode - 40.0 * spread)
    hi = mode + 60.0 * spread
    grid = numpy.linspace(lo, hi, grid_size)
    log_density = -0.5 * m * numpy.log(grid) - s / (2.0 * grid)
    weights = numpy.exp(log_density - log_density.max())
    norm = _trapezoid(weights, grid)
    mean = _trapezoid(weights * grid, grid) / norm
    second = _trapezoid(weights * grid * grid, grid) / norm
    return float(mean), float(math.sqrt(max(second - mean * mean, 0.0)))


def _trapezoid(values: numpy.ndarray, grid: numpy.ndarray) -> float:
    return float(trapezoid(values, grid))
