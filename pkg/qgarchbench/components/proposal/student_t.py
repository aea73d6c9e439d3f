"""
Multivariate Student's t proposal density for the independence sampler.

    g(theta) = Gamma((nu+p)/2) / Gamma(nu/2) / (det(Sigma)^(1/2) (nu pi)^(p/2))
               * [1 + (theta-M)^t Sigma^-1 (theta-M) / nu]^(-(nu+p)/2)

M and Sigma are fitted from chain samples through the moment relation
nu * Sigma / (nu - 2) = V = E[(theta-M)(theta-M)^t].
"""

import logging
import math

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Union

import numpy
import scipy.linalg
from scipy.special import gammaln

from qgarchbench.components.moments import MomentAccumulator
from qgarchbench.model import QgarchParams
from qgarchbench.utils.errors import DegenerateScatterError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_NU = 10.0
# relative size of the ridge added to Sigma when its factorization fails
RIDGE_SCALE = 1e-8


@dataclass(frozen=True, eq=False)
class ProposalSpec:
    M: numpy.ndarray
    Sigma: numpy.ndarray
    nu: float = DEFAULT_NU

    def __post_init__(self):
        M = numpy.array(self.M, dtype=numpy.float64).reshape(-1)
        Sigma = numpy.array(self.Sigma, dtype=numpy.float64)
        p = M.size
        if Sigma.shape != (p, p):
            raise ValidationError(f"Sigma must be {p}x{p}, got shape {Sigma.shape}")
        if not self.nu > 2:
            raise ValidationError(f"nu must be > 2, got {self.nu}")
        Sigma = 0.5 * (Sigma + Sigma.T)
        try:
            chol = scipy.linalg.cholesky(Sigma, lower=True)
        except numpy.linalg.LinAlgError as e:
            raise DegenerateScatterError(f"Sigma is not positive definite: {e}") from e
        M.setflags(write=False)
        Sigma.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "Sigma", Sigma)
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "chol", chol)
        log_det = 2.0 * float(numpy.sum(numpy.log(numpy.diag(chol))))
        log_norm = (
            gammaln((self.nu + p) / 2.0)
            - gammaln(self.nu / 2.0)
            - 0.5 * log_det
            - 0.5 * p * math.log(self.nu * math.pi)
        )
        object.__setattr__(self, "log_norm", float(log_norm))

    @property
    def dim(self) -> int:
        return int(self.M.size)

    @property
    def V(self) -> numpy.ndarray:
        return self.nu * self.Sigma / (self.nu - 2.0)

    def sample(self, rng: numpy.random.Generator) -> numpy.ndarray:
        return sample_student_t(self, rng)

    def log_density(self, theta: numpy.ndarray) -> float:
        return student_t_log_density(theta, self)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "M": self.M.tolist(),
            "Sigma": self.Sigma.tolist(),
            "V": self.V.tolist(),
            "nu": self.nu,
        }


def _as_matrix(samples: Union[numpy.ndarray, Sequence[QgarchParams]]) -> numpy.ndarray:
    if len(samples) and isinstance(samples[0], QgarchParams):
        return numpy.stack([s.to_array() for s in samples])
    return numpy.atleast_2d(numpy.asarray(samples, dtype=numpy.float64))


def spec_from_moments(
    mean: numpy.ndarray,
    V: numpy.ndarray,
    nu: float,
    count: int,
    spread: Optional[numpy.ndarray] = None,
) -> ProposalSpec:
    p = mean.size
    if count < p + 1:
        raise DegenerateScatterError(
            f"At least {p + 1} samples are needed to fit a {p}-dimensional proposal, got {count}"
        )
    # rounding in the mean leaves V ~ 1e-34 for identical samples, so zero is
    # judged against the location scale when the exact range is unknown
    if spread is not None:
        degenerate = not numpy.any(spread)
    else:
        degenerate = float(numpy.trace(V)) <= numpy.finfo(float).eps * (float(mean @ mean) + 1.0)
    if degenerate:
        raise DegenerateScatterError("Degenerate scatter: every sample is identical.")
    Sigma = V * (nu - 2.0) / nu
    Sigma = 0.5 * (Sigma + Sigma.T)
    try:
        return ProposalSpec(M=mean, Sigma=Sigma, nu=nu)
    except DegenerateScatterError:
        eps = RIDGE_SCALE * float(numpy.trace(V)) / p
        logger.warning("Sigma is not positive definite, adding ridge %.3e", eps)
        if not eps > 0:
            raise
        return ProposalSpec(M=mean, Sigma=Sigma + eps * numpy.eye(p), nu=nu)


def fit_proposal(
    samples: Union[numpy.ndarray, Sequence[QgarchParams]], nu: float = DEFAULT_NU
) -> ProposalSpec:
    """
    M = sample mean, V = sample covariance normalised by the count,
    Sigma = V * (nu - 2) / nu.
    """
    if not nu > 2:
        raise ValidationError(f"nu must be > 2, got {nu}")
    matrix = _as_matrix(samples)
    acc = MomentAccumulator(dim=matrix.shape[1]).absorb(matrix)
    return fit_from_accumulator(acc, nu)


def fit_from_accumulator(acc: MomentAccumulator, nu: float = DEFAULT_NU) -> ProposalSpec:
    return spec_from_moments(acc.mean, acc.scatter, nu, acc.count, spread=acc.spread)


def sample_student_t(
    spec: ProposalSpec,
    rng: numpy.random.Generator,
    size: Optional[int] = None,
    gaussian_limit: bool = False,
) -> numpy.ndarray:
    """
    M + L z sqrt(nu / w) with z ~ N(0, I), w ~ chi2(nu) and L the lower
    Cholesky factor of Sigma. Draw order: z, then w. With gaussian_limit the
    chi-square draw is skipped and w is pinned to its mean nu.
    """
    shape = (spec.dim,) if size is None else (size, spec.dim)
    z = rng.standard_normal(shape)
    if gaussian_limit:
        scale = 1.0
    else:
        w = rng.chisquare(spec.nu, size=None if size is None else (size, 1))
        scale = numpy.sqrt(spec.nu / w)
    return spec.M + (z @ spec.chol.T) * scale


def student_t_log_density(
    theta: Union[numpy.ndarray, QgarchParams], spec: ProposalSpec
) -> Union[float, numpy.ndarray]:
    """Exact log g(theta); accepts a single vector or an (n, p) batch."""
    if isinstance(theta, QgarchParams):
        theta = theta.to_array()
    x = numpy.asarray(theta, dtype=numpy.float64)
    single = x.ndim == 1
    dev = numpy.atleast_2d(x) - spec.M
    white = scipy.linalg.solve_triangular(spec.chol, dev.T, lower=True)
    quad = numpy.sum(white * white, axis=0)
    out = spec.log_norm - 0.5 * (spec.nu + spec.dim) * numpy.log1p(quad / spec.nu)
    return float(out[0]) if single else out
