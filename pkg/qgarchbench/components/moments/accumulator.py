"""
Running mean and scatter of parameter vectors.

Blocks are reduced with a two-pass mean/m2 and merged into the running
state with the parallel Welford combine (mean, m2, weight), so re-fitting the
proposal never rescans the chain history.
"""

from dataclasses import dataclass
from typing import Optional

import numpy


@dataclass
class MomentAccumulator:
    dim: int
    count: int = 0
    mean: Optional[numpy.ndarray] = None
    # sum of outer products of deviations from the running mean
    m2: Optional[numpy.ndarray] = None
    lo: Optional[numpy.ndarray] = None
    hi: Optional[numpy.ndarray] = None

    def __post_init__(self):
        if self.mean is None:
            self.mean = numpy.zeros(self.dim)
        if self.m2 is None:
            self.m2 = numpy.zeros((self.dim, self.dim))
        if self.lo is None:
            self.lo = numpy.full(self.dim, numpy.inf)
        if self.hi is None:
            self.hi = numpy.full(self.dim, -numpy.inf)

    def absorb(self, samples: numpy.ndarray) -> "MomentAccumulator":
        block = numpy.atleast_2d(numpy.asarray(samples, dtype=numpy.float64))
        if block.shape[1] != self.dim:
            raise ValueError(f"Expected vectors of length {self.dim}, got {block.shape[1]}")
        k = block.shape[0]
        if k == 0:
            return self
        block_mean = block.mean(axis=0)
        dev = block - block_mean
        block_m2 = dev.T @ dev
        total = self.count + k
        delta = block_mean - self.mean
        self.mean = self.mean + delta * (k / total)
        self.m2 = self.m2 + block_m2 + numpy.outer(delta, delta) * (self.count * k / total)
        # keep the scatter exactly symmetric
        self.m2 = 0.5 * (self.m2 + self.m2.T)
        self.lo = numpy.minimum(self.lo, block.min(axis=0))
        self.hi = numpy.maximum(self.hi, block.max(axis=0))
        self.count = total
        return self

    @property
    def scatter(self) -> numpy.ndarray:
        """V = E[(theta - M)(theta - M)^t], normalised by the count."""
        if self.count == 0:
            return numpy.zeros((self.dim, self.dim))
        return self.m2 / self.count

    @property
    def spread(self) -> numpy.ndarray:
        """Per-component max - min of everything absorbed. Exact, unlike the scatter."""
        if self.count == 0:
            return numpy.zeros(self.dim)
        return self.hi - self.lo

    def copy(self) -> "MomentAccumulator":
        return MomentAccumulator(
            dim=self.dim,
            count=self.count,
            mean=self.mean.copy(),
            m2=self.m2.copy(),
            lo=self.lo.copy(),
            hi=self.hi.copy(),
        )
