from .accumulator import MomentAccumulator
