from .samplers import list_samplers, load_sampler_by_name
