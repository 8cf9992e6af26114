# tools/experiment/__main__.py
"""
Unified CLI for the scan-statistics experiments.

Usage:
    python -m tools.experiment constants --out constants.json
    python -m tools.experiment --profile desk simulate --in manifest.yaml
    python -m tools.experiment gof --in samples.csv
    python -m tools.experiment scan --in increments.csv

Exit status: 0 on success, 1 on I/O failure, 2 on domain/argument/parse
errors, 3 when a convergence budget or tolerance cannot be met.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from ..errors import ToolkitError
from . import COMMANDS, get_command


def _say(*parts) -> None:
    # Console chatter goes to stderr; stdout may carry the JSON result.
    print(*parts, file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m tools.experiment",
        description="Scan statistics: Gumbel constants, ensembles and oracles",
    )
    parser.add_argument("--config", type=str, help="Path to config.yaml (default: auto-discover)")
    parser.add_argument("--profile", type=str, help="Profile from config.yaml (e.g. quick, desk)")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, cls in COMMANDS.items():
        cls.add_arguments(sub.add_parser(name, help=cls.help))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="[%(name)s] %(message)s",
        stream=sys.stderr,
    )

    try:
        command = get_command(args.command, config_path=args.config, profile=args.profile)

        _say("=" * 60)
        _say(f"Scan Experiments — {args.command.upper()}")
        for line in command.banner(args):
            _say(line)
        if command.config.profile:
            _say(f"Profile:     {command.config.profile}")
        _say("=" * 60)

        record = command.run(args)
        command.write(record, args)
    except ToolkitError as exc:
        _say(f"Error: {exc}")
        return exc.exit_code
    except OSError as exc:
        _say(f"I/O error: {exc.filename or ''} {exc.strerror or exc}")
        return 1

    # Summary
    _say(f"\n{'=' * 60}")
    _say("Summary")
    _say("=" * 60)
    for line in command.summary(record):
        _say(line)
    if record.metadata.get("wall_time") is not None:
        _say(f"  Wall time: {record.metadata['wall_time']:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
