from .kernels import (
    adaptive_mh_step,
    ChainState,
    independence_mh_step,
    metropolis_step,
    metropolis_sweep,
)
from .loader import list_samplers, load_sampler_by_name
