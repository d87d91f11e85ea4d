"""
QEC Simulator command line

Entry point for the correlated-bath QEC simulator: builds the RunConfig from
defaults, environment, config file and flags, dispatches to a subcommand and
maps simulator errors to process exit codes.
"""

import sys
import logging
import argparse
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from .commands import COMMANDS
from .schemas.run_config import RunConfig
from .utils.config import load_config
from .utils.errors import SimulationError

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
UNEXPECTED_EXIT = 70

logger = logging.getLogger(__name__)


def _config_flags() -> List[str]:
    return [model_field.alias for model_field in RunConfig.__fields__.values()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", dest="config_path", default=None, help="sectioned key-value config file")
    for key in _config_flags():
        common.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="VALUE")

    parser = argparse.ArgumentParser(prog="qecsim", description="Correlated-bath QEC simulator")
    subparsers = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    subparsers.required = True
    helps = {
        "epsilon": "tabulate the single-error exponent",
        "kernel": "dump the bath correlation kernel",
        "histories": "enumerate or sample syndrome histories",
        "correlations": "connected two-error correlation vs separation",
        "decay-fit": "fit correlation decay exponents",
        "validate": "run the oracle and property checks",
        "partition": "print the coset / recovery table",
    }
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=helps[name])
    return parser


def _flag_values(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: getattr(args, key) for key in _config_flags() if getattr(args, key, None) is not None}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args.config_path, _flag_values(args))
        logging.basicConfig(level=getattr(logging, config.log_level.upper(), logging.INFO), format=LOG_FORMAT,
                            force=True)
        logger.info(f"Running {args.subcommand}")
        outcome = COMMANDS[args.subcommand].run(config)
        for fmt, path in sorted(outcome["written"].items()):
            logger.info(f"{fmt.upper()} written to {path}")
        return 0
    except SimulationError as e:
        logger.error(e.detail)
        return e.exit_code
    except Exception:
        logger.exception("Unexpected failure")
        return UNEXPECTED_EXIT


if __name__ == "__main__":
    sys.exit(main())
