import logging
import os

from pathlib import Path
from typing import List, Optional, Union

import psutil

from qgarchbench.utils.path_utils import default_output_dir, ensure_dir

logger = logging.getLogger(__name__)


def setup_output_dir(output_dir: Optional[Union[str, Path]] = None) -> Path:
    path = ensure_dir(default_output_dir(output_dir))
    logger.info("[qgarchbench] writing results to %s", path)
    return path


def cpu_peak_mem() -> float:
    """Resident memory of this process in GB."""
    total = psutil.virtual_memory().total
    percentage = psutil.Process(os.getpid()).memory_percent()
    return percentage * total / 100 / 10**9


def log_peak_memory(label: str) -> float:
    mem = cpu_peak_mem()
    logger.info("[qgarchbench] %s: resident memory %.3f GB", label, mem)
    return mem


def run_config(config_file: Union[str, Path], extra_args: Optional[List[str]] = None) -> int:
    """Runs reproduce-table1 with the given experiment config file."""
    from qgarchbench.cli import run

    args = ["reproduce-table1", "--config", str(config_file)]
    if extra_args:
        args.extend(extra_args)
    return run(args)
