from .sampler import MetropolisSettings, run_metropolis_chain, Sampler
