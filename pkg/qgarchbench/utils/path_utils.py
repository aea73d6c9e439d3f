import os

from pathlib import Path
from typing import Optional, Union

REPO_PATH = Path(os.path.abspath(__file__)).parent.parent.parent
RUN_CONFIG_PATH = REPO_PATH.joinpath("benchmarks", "run_config")
OUTPUT_DIR_ENV = "QGARCH_OUTPUT_DIR"


def default_output_dir(override: Optional[Union[str, Path]] = None) -> Path:
    """Explicit flag first, then $QGARCH_OUTPUT_DIR, then the working directory."""
    if override:
        return Path(override)
    env_dir = os.environ.get(OUTPUT_DIR_ENV, None)
    if env_dir:
        return Path(env_dir)
    return Path(os.getcwd())


def ensure_dir(path: Union[str, Path]) -> Path:
    path = Path(path)
    Path.mkdir(path, parents=True, exist_ok=True)
    return path
