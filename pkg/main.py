import argparse
import logging
import os
import sys

from dotenv import find_dotenv, load_dotenv

# .env is read before the packages below take their settings from the environment
load_dotenv(find_dotenv(usecwd=True))

from commands import runs, sweeps  # noqa: E402
from utils.errors import ReceptionError, UsageError  # noqa: E402

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


class ReceptionArgumentParser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; this tool reserves 2 for domain errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(UsageError.exit_code, f"{self.prog}: error: {message}\n")


def configure_logging():
    level_name = os.getenv("RECEPTION_LOG_LEVEL", "INFO").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        raise UsageError(f"unknown RECEPTION_LOG_LEVEL '{level_name}'")

    handlers = [logging.StreamHandler(sys.stderr)]
    log_file = os.getenv("RECEPTION_LOG_FILE")
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


def build_parser() -> argparse.ArgumentParser:
    parser = ReceptionArgumentParser(
        prog="reception",
        description="Reception-queue analysis for molecular-communication drug delivery",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    # Register subcommand groups
    sweeps.register(subparsers)
    runs.register(subparsers)
    return parser


def main(argv=None) -> int:
    load_dotenv(find_dotenv(usecwd=True))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging()
        logger.info(f"Running '{args.command}'")
        return args.handler(args)
    except ReceptionError as e:
        logger.error(f"'{args.command}' failed: {e.detail}")
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
