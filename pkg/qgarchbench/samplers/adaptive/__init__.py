from .sampler import AdaptationSchedule, run_adaptive_chain, Sampler
