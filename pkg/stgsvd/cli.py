"""Command-line entry point.

One subcommand per experiment plus ``generate``, which exports a test
matrix or weight to Matrix Market. Exit codes: 0 success, 1 usage or
configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, NoReturn, Optional, Sequence, TextIO

from .config import ExperimentConfig, build_experiment_config
from .const import (
    CONF_DELTA,
    CONF_DROP_TOL,
    CONF_EXPERIMENT,
    CONF_FORMAT,
    CONF_K_GRID,
    CONF_KAPPA,
    CONF_KAPPA_LIST,
    CONF_MATRICES,
    CONF_MATRIX_FILE,
    CONF_METHODS,
    CONF_N,
    CONF_OUT,
    CONF_OVERSAMPLING,
    CONF_PRECONDITIONER,
    CONF_Q_LIST,
    CONF_REL_TOL_LIST,
    CONF_SEEDS,
    CONF_TIMINGS,
    CONF_WEIGHT_FILES,
    CONF_WEIGHT_SEED,
    CONF_WORKERS,
    DEFAULT_KAPPA,
    DEFAULT_N,
    DEFAULT_OVERSAMPLING,
    DEFAULT_RANDSVD_MODE,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    PACKAGE,
    SAFE_OVERSAMPLING,
    SUPPORTED_EXPERIMENTS,
    SUPPORTED_FORMATS,
    SUPPORTED_MATRICES,
    SUPPORTED_PRECONDITIONERS,
    VERSION,
)
from .coordinator import ExperimentCoordinator
from .diagnostics import get_run_diagnostics
from .exceptions import ConfigError, GsvdError
from .experiments import Row
from .operators.market import write_matrix_market
from .results import emit_results
from .testmatrices import TestMatrixSpec, make_minij, make_randsvd_spd, make_test_matrix

_LOGGER = logging.getLogger(__name__)

WEIGHT_KINDS = ["minij", "randsvd"]

EXPERIMENT_HELP = {
    "accuracy_vs_k": "relative error against target rank",
    "method_comparison": "randomized GSVD against the GHEP and two-sided baselines",
    "sv_and_angles": "singular value errors and canonical angles",
    "condition_sweep": "error against the condition number of T",
    "preconditioner": "plain against preconditioned Gaussian sketches",
    "inexactness": "leading singular values under inexact products",
    "bounds_audit": "realized errors against the a-priori bounds",
    "sensitivity": "sensitivity indices from truncated factors",
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed_tokens(token: str) -> list[int]:
    """Parse "7" or an inclusive range "0-19"."""
    try:
        if "-" in token:
            first, last = (int(part) for part in token.split("-", 1))
            return list(range(first, last + 1))
        return [int(token)]
    except ValueError as err:
        raise argparse.ArgumentTypeError(f"invalid seed token: {token}") from err


def _common_arguments() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--matrix", dest="matrices", nargs="+", choices=SUPPORTED_MATRICES)
    common.add_argument("--matrix-file", help="Matrix Market file used instead of --matrix")
    common.add_argument(
        "--weights", nargs=2, metavar=("S_MTX", "T_MTX"), help="Matrix Market weights"
    )
    common.add_argument("--n", type=int, help="dimension of generated matrices")
    common.add_argument("--kappa", type=float, help="condition number of generated T")
    common.add_argument("--kappa-list", type=float, nargs="+")
    common.add_argument("--k-grid", type=int, nargs="+")
    common.add_argument(
        "-p",
        "--oversampling",
        type=int,
        help=f"oversampling (default {DEFAULT_OVERSAMPLING}; {SAFE_OVERSAMPLING} is a safe "
        "choice for Gaussian sketches)",
    )
    common.add_argument("--q-list", type=int, nargs="+")
    common.add_argument(
        "--seed-list", type=_seed_tokens, nargs="+", help='seeds such as "0-19 42"'
    )
    common.add_argument("--delta", type=float, help="failure probability of the bounds")
    common.add_argument("--methods", nargs="+", help='e.g. "gsvd-q0 gsvd-q1 geneig"')
    common.add_argument("--rel-tol-list", type=float, nargs="+")
    common.add_argument("--preconditioner", choices=SUPPORTED_PRECONDITIONERS)
    common.add_argument("--drop-tol", type=float)
    common.add_argument("--weight-seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--serial", action="store_true", help="run on one thread")
    common.add_argument(
        "--timings", action="store_true", help="add wall time (non-deterministic)"
    )
    common.add_argument("--format", choices=SUPPORTED_FORMATS)
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("-v", "--verbose", action="count", default=0)
    return common


def build_parser() -> argparse.ArgumentParser:
    """Return the top-level parser."""
    parser = _Parser(prog=PACKAGE, description="Randomized (S,T)-weighted GSVD toolkit")
    parser.add_argument("--version", action="version", version=f"{PACKAGE} {VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_arguments()
    for key in SUPPORTED_EXPERIMENTS:
        subparsers.add_parser(key, parents=[common], help=EXPERIMENT_HELP[key])

    generate = subparsers.add_parser("generate", help="export a matrix to Matrix Market")
    generate.add_argument("--kind", required=True, choices=SUPPORTED_MATRICES + WEIGHT_KINDS)
    generate.add_argument("--n", type=int, default=DEFAULT_N)
    generate.add_argument("--r", type=int)
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--gap", type=float)
    generate.add_argument("--noise", type=float)
    generate.add_argument("--exponent", type=float)
    generate.add_argument("--base", type=float)
    generate.add_argument("--density", type=float)
    generate.add_argument("--kappa", type=float, default=DEFAULT_KAPPA)
    generate.add_argument("--mode", type=int, default=DEFAULT_RANDSVD_MODE)
    generate.add_argument("--out", required=True)
    generate.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def args_to_config(args: argparse.Namespace) -> dict[str, Any]:
    """Translate parsed flags into an EXPERIMENT_SCHEMA mapping."""
    data: dict[str, Any] = {CONF_EXPERIMENT: args.command}
    optional = {
        CONF_MATRICES: args.matrices,
        CONF_MATRIX_FILE: args.matrix_file,
        CONF_WEIGHT_FILES: args.weights,
        CONF_N: args.n,
        CONF_KAPPA: args.kappa,
        CONF_KAPPA_LIST: args.kappa_list,
        CONF_K_GRID: args.k_grid,
        CONF_OVERSAMPLING: args.oversampling,
        CONF_Q_LIST: args.q_list,
        CONF_SEEDS: (
            [seed for group in args.seed_list for seed in group] if args.seed_list else None
        ),
        CONF_DELTA: args.delta,
        CONF_METHODS: args.methods,
        CONF_REL_TOL_LIST: args.rel_tol_list,
        CONF_PRECONDITIONER: args.preconditioner,
        CONF_DROP_TOL: args.drop_tol,
        CONF_WEIGHT_SEED: args.weight_seed,
        CONF_WORKERS: 1 if args.serial else args.workers,
        CONF_FORMAT: args.format,
        CONF_OUT: args.out,
    }
    data.update({key: value for key, value in optional.items() if value is not None})
    data[CONF_TIMINGS] = bool(args.timings)
    return data


def _generate(args: argparse.Namespace) -> int:
    if args.kind == "minij":
        matrix = make_minij(args.n)
        symmetric = True
    elif args.kind == "randsvd":
        matrix = make_randsvd_spd(args.n, args.kappa, mode=args.mode, seed=args.seed)
        symmetric = True
    else:
        overrides = {
            name: getattr(args, name)
            for name in ("r", "gap", "noise", "exponent", "base", "density")
            if getattr(args, name) is not None
        }
        matrix = make_test_matrix(
            TestMatrixSpec(kind=args.kind, n=args.n, seed=args.seed, **overrides)
        )
        symmetric = False
    write_matrix_market(
        args.out, matrix, comment=f"{PACKAGE} {VERSION} {args.kind}", symmetric=symmetric
    )
    return EXIT_OK


def run_experiment(cfg: ExperimentConfig, stream: Optional[TextIO] = None) -> list[Row]:
    """Run one experiment and write its rows to cfg.out (or ``stream``).

    Raises:
        ConfigError: If the configuration is rejected while planning
        NumericalFailure: If any task fails numerically
    """
    coordinator = ExperimentCoordinator(cfg)
    rows = coordinator.run()
    emit_results(
        rows,
        coordinator.columns,
        cfg.format,
        cfg.out,
        metadata=get_run_diagnostics(cfg, coordinator),
        stream=stream,
    )
    return rows


def _run_experiment(args: argparse.Namespace) -> int:
    run_experiment(build_experiment_config(args_to_config(args)))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return the exit code."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        if args.command == "generate":
            return _generate(args)
        return _run_experiment(args)
    except ConfigError as err:
        _LOGGER.error("Invalid configuration: %s", err)
        print(f"{PACKAGE}: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        _LOGGER.error("I/O error: %s", err)
        print(f"{PACKAGE}: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except GsvdError as err:
        _LOGGER.error("Numerical failure: %s", err)
        print(f"{PACKAGE}: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
