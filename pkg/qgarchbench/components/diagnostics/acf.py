"""
Autocorrelation of a single chain coordinate and its integrated time.

ACF(t) = (1/N) sum_{j=1}^{N-t} (x_j - <x>)(x_{j+t} - <x>) / var(x), with the
population variance; the 1/N normalisation is kept at every lag.
"""

import logging
import math

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy
import scipy.fft

from qgarchbench.utils.errors import ActNotConvergedError, ValidationError

logger = logging.getLogger(__name__)

# window multiplier of the self-consistent truncation rule
DEFAULT_WINDOW_C = 6.0


def default_t_max(n: int) -> int:
    return min(n - 1, max(100, n // 10))


@dataclass(frozen=True)
class AcfSeries:
    # values[t] for t = 0..t_max
    values: numpy.ndarray
    # length of the series the values were measured on
    n: int

    @property
    def t_max(self) -> int:
        return int(self.values.size - 1)

    @property
    def lags(self) -> numpy.ndarray:
        return numpy.arange(self.values.size)

    @classmethod
    def ideal(cls, values: Sequence[float], n: int) -> "AcfSeries":
        """Wraps a known curve, e.g. rho**t, for checking the window rule."""
        values = numpy.asarray(values, dtype=numpy.float64)
        if values.ndim != 1 or values.size < 2 or values[0] != 1.0:
            raise ValidationError("An ACF curve needs at least two lags and ACF(0) = 1.")
        return cls(values=values, n=n)


@dataclass(frozen=True)
class ActWindow:
    tau: float
    tau_error: float
    # number of lags summed
    window: int
    converged: bool
    # the windowed sum was negative, so tau < 0.5; reported as is
    negative_sum: bool


def acf(series: Sequence[float], t_max: Optional[int] = None) -> AcfSeries:
    x = numpy.asarray(series, dtype=numpy.float64)
    if x.ndim != 1:
        raise ValidationError(f"Expected a 1-D series, got shape {x.shape}")
    n = x.size
    if t_max is None:
        t_max = default_t_max(n)
    if not 1 <= t_max < n:
        raise ValidationError(f"Need 1 <= t_max < N, got t_max={t_max}, N={n}")
    # a constant series leaves c0 at rounding level instead of zero
    if not numpy.ptp(x) > 0.0:
        raise ValidationError("The series has zero variance; its ACF is undefined.")
    dx = x - numpy.mean(x)
    c0 = float(numpy.dot(dx, dx))
    size = scipy.fft.next_fast_len(2 * n, real=True)
    spectrum = scipy.fft.rfft(dx, n=size)
    cov = scipy.fft.irfft(spectrum * numpy.conj(spectrum), n=size)[: t_max + 1]
    values = cov / c0
    values[0] = 1.0
    return AcfSeries(values=values, n=n)


def act_window(acf_series: AcfSeries, c: float = DEFAULT_WINDOW_C) -> ActWindow:
    """
    tau(W) = 1/2 + sum_{i=1}^{W} ACF(i), with W the smallest lag satisfying
    W >= c * tau(W). Without such a lag the full t_max sum is returned and
    `converged` is False.
    """
    taus = 0.5 + numpy.cumsum(acf_series.values[1:])
    lags = numpy.arange(1, taus.size + 1)
    hits = numpy.flatnonzero(lags >= c * taus)
    converged = hits.size > 0
    w = int(lags[hits[0]]) if converged else int(lags[-1])
    tau = float(taus[w - 1])
    tau_error = abs(tau) * math.sqrt(2.0 * (2 * w + 1) / acf_series.n)
    return ActWindow(
        tau=tau,
        tau_error=tau_error,
        window=w,
        converged=converged,
        negative_sum=tau < 0.5,
    )


def integrated_act(
    acf_series: AcfSeries, c: float = DEFAULT_WINDOW_C
) -> Tuple[float, float]:
    result = act_window(acf_series, c)
    if not result.converged:
        raise ActNotConvergedError(
            f"No self-consistent window (c={c}) below t_max={acf_series.t_max}; "
            f"tau at t_max is {result.tau:.3f}"
        )
    return result.tau, result.tau_error


def batch_means_error(series: Sequence[float], batch_size: int) -> float:
    """Standard error of the mean from non-overlapping batch averages."""
    x = numpy.asarray(series, dtype=numpy.float64)
    if batch_size < 1:
        raise ValidationError(f"batch_size must be >= 1, got {batch_size}")
    n_batches = x.size // batch_size
    if n_batches < 2:
        raise ValidationError(
            f"Need at least two batches of {batch_size}, series has {x.size} points"
        )
    means = x[: n_batches * batch_size].reshape(n_batches, batch_size).mean(axis=1)
    return float(numpy.std(means, ddof=1) / math.sqrt(n_batches))
