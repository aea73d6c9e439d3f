from .config import ExperimentConfig, FLAT_KEYS
from .runner import (
    compare_efficiency,
    EfficiencyRatio,
    format_comparison,
    run_chain,
    run_experiment,
    RunArtifacts,
    table1_rows,
)
