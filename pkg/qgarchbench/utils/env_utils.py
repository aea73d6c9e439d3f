"""
Utils for seeding and the random streams used by simulation and the chains.
"""

import logging
import os
from typing import Dict

import numpy

log = logging.getLogger(__name__)

MAIN_RANDOM_SEED = 1337
SLOW_TESTS_ENV = "QGARCHBENCH_RUN_SLOW"
RUN_CONFIG_ENV = "QGARCH_RUN_CONFIG"

# Order of the streams spawned from the chain seed. Changing it changes every
# chain file produced from a given seed.
CHAIN_STREAMS: Dict[str, int] = {
    "adaptive": 0,
    "metropolis": 1,
}


def make_data_rng(seed: int) -> numpy.random.Generator:
    return numpy.random.Generator(numpy.random.PCG64(numpy.random.SeedSequence(seed)))


def make_chain_rng(seed: int, sampler_name: str) -> numpy.random.Generator:
    """
    Stream for one sampler. Both samplers spawn from the same chain seed, so
    they can run side by side without sharing generator state.
    """
    if sampler_name not in CHAIN_STREAMS:
        raise KeyError(f"No random stream registered for sampler {sampler_name}.")
    children = numpy.random.SeedSequence(seed).spawn(len(CHAIN_STREAMS))
    return numpy.random.Generator(numpy.random.PCG64(children[CHAIN_STREAMS[sampler_name]]))


def slow_tests_enabled() -> bool:
    return os.environ.get(SLOW_TESTS_ENV, "0") not in ("", "0", "false", "False")
