"""
matchlab
Command-line entry point: group, field, verify, campaign, cert and hunt commands
"""
import argparse
import logging
import sys

from commands import campaign, cert, field, group, hunt, verify
from matchlab.config import load_settings
from matchlab.errors import ConfigError, MatchlabError, SchemaError
from matchlab.schemas import canonical_json

logger = logging.getLogger("matchlab")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

COMMANDS = (group, field, verify, campaign, cert, hunt)


class MatchlabParser(argparse.ArgumentParser):
    """Usage errors become ConfigError so they share exit code 3"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = MatchlabParser(prog="matchlab", description="Matchings in abelian groups and field extensions")
    parser.add_argument("--config", metavar="PATH", help="settings TOML (default .matchlab/config.toml)")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("--quiet", action="store_true", help="no output, only the exit code")

    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(level):
    root = logging.getLogger()
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    root.setLevel(level)


def main(argv=None) -> int:
    configure_logging(logging.INFO)
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        logger.error("%s", e)
        return e.exit_code
    except SystemExit as e:
        # --help
        return 0 if not e.code else ConfigError.exit_code

    if args.quiet:
        configure_logging(logging.CRITICAL + 1)

    try:
        settings = load_settings(args.config)
        if args.verbose:
            configure_logging(logging.DEBUG)
        elif not args.quiet:
            configure_logging(settings.log_level.upper())
        return args.handler(args, settings)
    except SchemaError as e:
        logger.error("%s", e)
        if e.hint is not None:
            logger.error("hint: %s", canonical_json(e.hint))
        return e.exit_code
    except MatchlabError as e:
        logger.error("%s", e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
