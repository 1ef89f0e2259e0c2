"""Main entry point for the treeloss command line."""

import argparse
import logging
import sys
from typing import Sequence

from dotenv import load_dotenv

from hierarchy.exceptions import TreeLossError

from . import __version__
from .commands import COMMANDS
from .errors import UsageError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treeloss",
        description="Tree-based semantic losses, OOD thresholds and synthetic benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand; returns the process exit code."""
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        format=LOG_FORMAT,
        level=logging.DEBUG if args.verbose else logging.INFO,
    )

    try:
        return args.handler(args)
    except UsageError as e:
        print(f"treeloss {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except TreeLossError as e:
        print(f"treeloss {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        print(f"treeloss {args.command}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
