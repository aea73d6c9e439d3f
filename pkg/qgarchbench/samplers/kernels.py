"""
Single-step MH kernels. Each kernel draws its proposal first and then exactly
one uniform for the accept test, whatever the outcome, so the random stream
consumed per step is fixed.
"""

import math

from dataclasses import dataclass, replace
from typing import Callable, Protocol

import numpy

from qgarchbench.components.proposal import ProposalSpec

LogTarget = Callable[[numpy.ndarray], float]


class IndependenceProposal(Protocol):
    def sample(self, rng: numpy.random.Generator) -> numpy.ndarray: ...

    def log_density(self, theta: numpy.ndarray) -> float: ...


@dataclass(frozen=True, eq=False)
class ChainState:
    theta: numpy.ndarray
    # always equals log_target(theta)
    log_post: float
    step_index: int = 0
    accepts: int = 0
    rejects: int = 0

    def moved(self, theta: numpy.ndarray, log_post: float) -> "ChainState":
        return replace(
            self,
            theta=theta,
            log_post=log_post,
            step_index=self.step_index + 1,
            accepts=self.accepts + 1,
        )

    def stayed(self) -> "ChainState":
        return replace(self, step_index=self.step_index + 1, rejects=self.rejects + 1)

    @property
    def acceptance(self) -> float:
        total = self.accepts + self.rejects
        return self.accepts / total if total else math.nan


def log_acceptance(log_ratio_new: float, log_ratio_cur: float) -> float:
    """
    log min[1, exp(log_ratio_new - log_ratio_cur)] where each argument is
    log P(x) - log g(x) (g = 0 for a symmetric proposal). A -inf proposal is
    never accepted; leaving a -inf current point is always accepted.
    """
    if log_ratio_new == -math.inf or math.isnan(log_ratio_new):
        return -math.inf
    if log_ratio_cur == -math.inf:
        return 0.0
    return min(0.0, log_ratio_new - log_ratio_cur)


def _accept(log_alpha: float, rng: numpy.random.Generator) -> bool:
    u = rng.random()
    if log_alpha >= 0.0:
        return True
    return u < math.exp(log_alpha)


def metropolis_step(
    state: ChainState,
    step_sizes: numpy.ndarray,
    rng: numpy.random.Generator,
    log_target: LogTarget,
) -> ChainState:
    """Joint random-walk update, theta' = theta + U[-step, +step] per component."""
    proposal = state.theta + rng.uniform(-step_sizes, step_sizes)
    log_post_new = log_target(proposal)
    log_alpha = log_acceptance(log_post_new, state.log_post)
    if _accept(log_alpha, rng):
        return state.moved(proposal, log_post_new)
    return state.stayed()


def metropolis_sweep(
    state: ChainState,
    step_sizes: numpy.ndarray,
    rng: numpy.random.Generator,
    log_target: LogTarget,
) -> ChainState:
    """One-at-a-time variant: one random-walk MH step per component, in order."""
    for i in range(state.theta.size):
        proposal = state.theta.copy()
        proposal[i] += rng.uniform(-step_sizes[i], step_sizes[i])
        log_post_new = log_target(proposal)
        if _accept(log_acceptance(log_post_new, state.log_post), rng):
            state = state.moved(proposal, log_post_new)
        else:
            state = state.stayed()
    return state


def independence_mh_step(
    state: ChainState,
    proposal: IndependenceProposal,
    rng: numpy.random.Generator,
    log_target: LogTarget,
) -> ChainState:
    """MH step with g(theta'|theta) = g(theta')."""
    candidate = proposal.sample(rng)
    log_post_new = log_target(candidate)
    log_alpha = log_acceptance(
        log_post_new - proposal.log_density(candidate),
        state.log_post - proposal.log_density(state.theta),
    )
    if _accept(log_alpha, rng):
        return state.moved(candidate, log_post_new)
    return state.stayed()


def adaptive_mh_step(
    state: ChainState,
    spec: ProposalSpec,
    rng: numpy.random.Generator,
    log_target: LogTarget,
) -> ChainState:
    return independence_mh_step(state, spec, rng, log_target)


def independence_transition_log_density(
    a: numpy.ndarray, b: numpy.ndarray, spec: ProposalSpec, log_target: LogTarget
) -> float:
    """log T(a -> b) = log g(b) + log P_MH(a, b) for b != a, with a frozen proposal."""
    log_g_b = spec.log_density(b)
    return log_g_b + log_acceptance(
        log_target(b) - log_g_b, log_target(a) - spec.log_density(a)
    )
