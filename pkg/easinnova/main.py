"""easinnova command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import TypeVar

from . import __version__
from .commands import EXIT_ERRORS, EXIT_IO, EXIT_USAGE, CommandHandler
from .config import CONFIG_ENV, PROJECT_ENV, USER_CONFIG, Config
from .errors import ArtifactError, PreconditionError
from .matrix import CellId, Stage

log = logging.getLogger(__name__)

T = TypeVar("T")


def setup_logging(verbose: bool = False) -> None:
    """Configure logging."""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )


def _argument(parse: Callable[[str], T]) -> Callable[[str], T]:
    """Turn a parser's ValueError into an argparse usage error."""

    def convert(text: str) -> T:
        try:
            return parse(text)
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from None

    return convert


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="easinnova",
        description="EasInnova - business process innovation projects across the CIM/PIM/PSM matrix",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-p", "--project",
        type=Path,
        help=f"Project directory (default: ${PROJECT_ENV}, config project.path, or cwd)",
    )
    parser.add_argument(
        "-c", "--config",
        type=Path,
        help=f"Path to config file (default: ${CONFIG_ENV} or {USER_CONFIG})",
    )
    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Enable verbose logging",
    )

    reporting = argparse.ArgumentParser(add_help=False)
    reporting.add_argument("--format", choices=["text", "json"], help="Output format")
    stage_arg = argparse.ArgumentParser(add_help=False)
    stage_arg.add_argument("--stage", type=_argument(Stage.parse), default="TOBE", help="ASIS or TOBE (default: TOBE)")

    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    init = sub.add_parser("init", parents=[reporting], help="Create an empty project skeleton")
    init.add_argument("name", help="Project name")

    sub.add_parser("status", parents=[reporting], help="Show the 3x3 matrix and the next step")

    validate = sub.add_parser("validate", parents=[reporting], help="Run every validator")
    validate.add_argument("--cell", type=_argument(CellId.parse), help="Only this cell, gate checklist included (e.g. CIM-ASIS)")
    validate.add_argument("--suggest", action="store_true", help="List terms missing from the lexicons")

    lexicon = sub.add_parser("lexicon", parents=[reporting], help="Lexicon operations")
    lexicon.add_argument("action", choices=["diff"], help="diff: AsIs to ToBe per category")

    derive = sub.add_parser(
        "derive", parents=[reporting, stage_arg], help="Derive use cases and class skeleton"
    )
    derive.add_argument("--write", action="store_true", help="Store the result in pim/tobe")

    sub.add_parser("crud-matrix", parents=[reporting, stage_arg], help="Show the CRUDA matrix")

    export = sub.add_parser("export", parents=[reporting, stage_arg], help="Write BPMN 2.0 XML")
    export.add_argument("--vendor", choices=["camunda"], help="Add engine task hints")
    export.add_argument("--output", type=Path, help="Target file (default: export/<stage>.bpmn)")

    simulate = sub.add_parser("simulate", parents=[reporting, stage_arg], help="Token-game simulation")
    simulate.add_argument("--mode", choices=["exhaustive", "trace"], default="exhaustive")
    simulate.add_argument("--seed", type=int, default=0, help="Seed for trace mode")
    simulate.add_argument("--max-states", type=int, help="State bound for exhaustive mode")
    simulate.add_argument("--cell", type=_argument(CellId.parse), help="Model cell (default: PSM model of the stage, else PIM)")

    enrich = sub.add_parser("enrich", parents=[reporting], help="Lift the ToBe PIM model to PSM")
    enrich.add_argument("--annotations", type=Path, required=True, help="JSON task annotations")

    select = sub.add_parser("select", parents=[reporting], help="Select the candidate solution")
    select.add_argument("label", help="Solution label")

    imp = sub.add_parser("import", parents=[reporting, stage_arg], help="Read a BPMN 2.0 file")
    imp.add_argument("file", type=Path, help="BPMN XML file")

    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse ``argv`` and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    setup_logging(args.verbose)

    try:
        config = Config.discover(args.config)
    except (OSError, ValueError) as e:
        log.error(f"Config error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO

    handler = CommandHandler(config, config.project_dir(args.project))
    try:
        return handler.handle(args)
    except PreconditionError as e:
        log.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERRORS
    except (ArtifactError, OSError) as e:
        log.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    """Main entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
