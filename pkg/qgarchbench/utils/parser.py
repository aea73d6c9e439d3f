import argparse

from qgarchbench.components.diagnostics import DEFAULT_HIST_BINS
from qgarchbench.components.proposal import DEFAULT_NU
from qgarchbench.model import DEFAULT_SIM_BURN_IN, DEFAULT_TRUE_PARAMS
from qgarchbench.utils.env_utils import CHAIN_STREAMS, MAIN_RANDOM_SEED
from qgarchbench.utils.mcmc_op import DEFAULT_BURN_IN, DEFAULT_STEP_SIZES, DEFAULT_WINDOW


def _ranged_int(minimum: int):
    def parse(value: str) -> int:
        try:
            out = int(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}")
        if out < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}, got {out}")
        return out

    parse.__name__ = f"int>={minimum}"
    return parse


positive_int = _ranged_int(1)
non_negative_int = _ranged_int(0)


def positive_float(value: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {value!r}")
    if not out > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {out}")
    return out


def nu_type(value: str) -> float:
    out = positive_float(value)
    if not out > 2:
        raise argparse.ArgumentTypeError(f"nu must be > 2, got {out}")
    return out


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--output-dir",
        type=str,
        default=None,
        help="Directory for the outputs. Defaults to $QGARCH_OUTPUT_DIR, then the working directory.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging.")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings and errors only.")


def _add_chain_args(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--burn-in", type=non_negative_int, default=default(DEFAULT_BURN_IN),
                        help="Metropolis warm-up steps, discarded.")
    parser.add_argument("--pilot", type=positive_int, default=default(1000),
                        help="Metropolis steps used for the first proposal fit.")
    parser.add_argument("--refresh", type=positive_int, default=default(DEFAULT_WINDOW),
                        help="Re-fit the proposal every this many steps.")
    parser.add_argument("--analysis-samples", type=positive_int, default=default(100000),
                        help="Retained samples per chain.")
    parser.add_argument("--nu", type=nu_type, default=default(DEFAULT_NU),
                        help="Degrees of freedom of the Student's t proposal.")
    parser.add_argument("--freeze-after", type=non_negative_int, default=default(None),
                        help="Stop re-fitting the proposal after this adaptive step.")
    parser.add_argument("--step-sizes", type=positive_float, nargs=4, default=default(list(DEFAULT_STEP_SIZES)),
                        metavar=("ALPHA", "BETA", "OMEGA", "GAMMA"),
                        help="Uniform half-widths of the Metropolis proposal.")
    parser.add_argument("--one-at-a-time", action="store_true", default=default(False),
                        help="Metropolis updates one component per step instead of jointly.")
    parser.add_argument("--hist-bins", type=_ranged_int(2), default=default(DEFAULT_HIST_BINS),
                        help="Histogram bins per parameter.")
    parser.add_argument("--acf-t-max", type=positive_int, default=default(None),
                        help="Largest ACF lag. Defaults to min(N-1, max(100, N/10)).")
    parser.add_argument("--progress", action="store_true", help="Show progress bars (needs tqdm).")


def get_parser():
    parser = argparse.ArgumentParser(
        prog="qgarchbench",
        allow_abbrev=False,
        description="Bayesian QGARCH(1,1) inference with an adaptive Student's t sampler.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", allow_abbrev=False, help="Generate a QGARCH series.")
    _add_common(simulate)
    simulate.add_argument("--alpha", type=float, default=DEFAULT_TRUE_PARAMS.alpha)
    simulate.add_argument("--beta", type=float, default=DEFAULT_TRUE_PARAMS.beta)
    simulate.add_argument("--omega", type=float, default=DEFAULT_TRUE_PARAMS.omega)
    simulate.add_argument("--gamma", type=float, default=DEFAULT_TRUE_PARAMS.gamma)
    simulate.add_argument("--n", type=positive_int, default=2000, help="Number of observations.")
    simulate.add_argument("--seed", type=non_negative_int, default=MAIN_RANDOM_SEED)
    simulate.add_argument("--sim-burn-in", type=non_negative_int, default=DEFAULT_SIM_BURN_IN,
                          help="Discarded leading observations.")
    simulate.add_argument("--output", type=str, default=None,
                          help="Output CSV. Defaults to data.csv in the output dir.")

    fit = sub.add_parser("fit", allow_abbrev=False, help="Sample the posterior of a stored series.")
    _add_common(fit)
    fit.add_argument("--data", type=str, required=True, help="Series CSV (or JSON) file.")
    fit.add_argument("--sampler", choices=list(CHAIN_STREAMS), default="adaptive")
    fit.add_argument("--seed", type=non_negative_int, default=MAIN_RANDOM_SEED, help="Chain seed.")
    _add_chain_args(fit)

    diagnose = sub.add_parser("diagnose", allow_abbrev=False, help="Diagnostics of a stored chain CSV.")
    _add_common(diagnose)
    diagnose.add_argument("--chain", type=str, required=True, help="Chain CSV file.")
    diagnose.add_argument("--name", type=str, default=None, help="Label used in the report.")
    diagnose.add_argument("--hist-bins", type=_ranged_int(2), default=DEFAULT_HIST_BINS)
    diagnose.add_argument("--acf-t-max", type=positive_int, default=None)
    diagnose.add_argument("--figures", action="store_true",
                          help="Also write ACF and histogram CSVs.")

    table1 = sub.add_parser(
        "reproduce-table1", allow_abbrev=False, help="Full comparison of both samplers on simulated data."
    )
    _add_common(table1)
    table1.add_argument("--config", type=str, default=None, help="Experiment config YAML.")
    table1.add_argument("--data-seed", type=non_negative_int, default=None)
    table1.add_argument("--chain-seed", type=non_negative_int, default=None)
    table1.add_argument("--metropolis-samples", type=positive_int, default=None,
                        help="Baseline chain length. Defaults to --analysis-samples when that is given.")
    table1.add_argument("--parallel", action="store_true", default=None,
                        help="Run the two chains in separate processes.")
    _add_chain_args(table1, suppress=True)
    return parser
