"""
qgarchbench runner.

Runs reproduce-table1 with the config in $QGARCH_RUN_CONFIG when it is set,
otherwise passes the command line to the qgarchbench CLI.
"""

import os
import sys
from typing import List, Optional

from qgarchbench.cli import run as run_cli
from qgarchbench.utils.env_utils import RUN_CONFIG_ENV
from qgarchbench.utils.run_utils import run_config


def run(args: Optional[List[str]] = None) -> int:
    if args is None:
        args = sys.argv[1:]
    if config := os.environ.get(RUN_CONFIG_ENV, None):
        return run_config(config, args)
    return run_cli(args)


if __name__ == "__main__":
    sys.exit(run())
