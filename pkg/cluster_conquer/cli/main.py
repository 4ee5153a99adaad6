"""Command-line entry point: cluster-conquer {gen, run, pcs-table, pcc-sweep, bench, verify}"""
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from cluster_conquer.cli.commands import cmd_bench, cmd_gen, cmd_pcc_sweep, cmd_pcs_table, cmd_run, cmd_verify
from cluster_conquer.cli.verification import SUITES
from cluster_conquer.exceptions import Cluster_Conquer_Error, Configuration_Error
from cluster_conquer.problems.fixtures import FIXTURE_ALIASES, FIXTURES
from cluster_conquer.procedures.Conquer_Config import Experiment_Config, load_experiment

logger = logging.getLogger(__name__)

SEED_VARIABLE = "CLUSTER_CONQUER_SEED"
DEFAULT_DRAWS = 10 ** 6
EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    """
    :return: parser with one subparser per command; the shared flags are accepted after the command name
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("results"), help="output directory (default: results)")
    common.add_argument("--seed", type=int, default=None, help=f"root seed, overrides the config and ${SEED_VARIABLE}")
    common.add_argument("--workers", type=int, default=None, help="worker processes, overrides the config")
    common.add_argument("--verbose", "-v", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="cluster-conquer", description="Parallel ranking and selection by clustering and conquer")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", parents=[common], help="write problem JSON files")
    gen.add_argument("--config", type=Path, required=True, help="experiment JSON")
    gen.add_argument("--observations", type=int, default=0, help="also write this many simulated replications per problem as CSV")

    for name, help_text in (("run", "macro-replicate the configured procedures"),
                            ("pcc-sweep", "empirical correct-clustering rate against its lower bound")):
        command = commands.add_parser(name, parents=[common], help=help_text)
        command.add_argument("--config", type=Path, required=True, help="experiment JSON")

    bench = commands.add_parser("bench", parents=[common], help="benchmark procedures over the configured problem sizes")
    bench.add_argument("--config", type=Path, required=True, help="experiment JSON")
    bench.add_argument("--reps", type=int, default=None, help="replications per row, overrides the config")

    table = commands.add_parser("pcs-table", parents=[common], help="Monte Carlo PCS of the five-alternative fixtures")
    table.add_argument("--fixture", choices=sorted(FIXTURES) + sorted(FIXTURE_ALIASES), required=True)
    table.add_argument("--draws", type=int, default=DEFAULT_DRAWS)

    verify = commands.add_parser("verify", parents=[common], help="sign and monotonicity probes")
    verify.add_argument("--suite", choices=list(SUITES), required=True)
    verify.add_argument("--draws", type=int, default=DEFAULT_DRAWS)
    return parser


def resolve_seed(flag: Optional[int], configured: int) -> int:
    """
    :return: the --seed flag, else the environment override, else the configured seed
    """
    if flag is not None:
        return flag
    if SEED_VARIABLE in os.environ:
        try:
            return int(os.environ[SEED_VARIABLE])
        except ValueError as error:
            raise Configuration_Error(f"{SEED_VARIABLE} must be an integer, got {os.environ[SEED_VARIABLE]!r}") from error
    return configured


def _load(args: argparse.Namespace) -> Experiment_Config:
    config = load_experiment(args.config)
    conquer = config.conquer if args.workers is None else config.conquer.model_copy(update={"workers": args.workers})
    return config.model_copy(update={"seed": resolve_seed(args.seed, config.seed), "conquer": conquer})


def dispatch(args: argparse.Namespace) -> int:
    """
    :return: process exit code
    """
    workers = 1 if args.workers is None else args.workers
    if args.command == "pcs-table":
        cmd_pcs_table(args.fixture, args.draws, resolve_seed(args.seed, 0), args.out, workers)
        return EXIT_OK
    if args.command == "verify":
        checks = cmd_verify(args.suite, args.draws, resolve_seed(args.seed, 0), workers)
        return EXIT_OK if all(check.passed for check in checks) else EXIT_FAILURE
    config = _load(args)
    if args.command == "gen":
        cmd_gen(config, args.out, args.observations)
    elif args.command == "run":
        cmd_run(config, args.out)
    elif args.command == "pcc-sweep":
        cmd_pcc_sweep(config, args.out)
    elif args.command == "bench":
        cmd_bench(config, config.reps if args.reps is None else args.reps, args.out)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    :param argv: arguments after the program name, sys.argv when None
    :return: 0 on success, 1 on a runtime failure, 2 on an invalid configuration
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except Configuration_Error as error:
        logger.error(str(error))
        print(f"configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIG
    except (Cluster_Conquer_Error, KeyError, ValueError, OSError) as error:
        logger.exception(f"{args.command} failed")
        print(f"{args.command} failed: {error}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
