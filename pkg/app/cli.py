"""Command-line interface for Lead-Lag Engine."""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from app import __version__

COMMANDS = {
    "synth": "Generate a synthetic price and benchmark panel",
    "network": "Export the lead-lag network (DOT graph and adjacency CSV)",
    "select": "Write the quarterly pair selections",
    "backtest": "Backtest the strategy (ledger, daily values, summary)",
    "sweep": "Sweep buy threshold x trailing stop (contour and cross-section CSVs)",
}


def _common_options(global_flags: bool) -> argparse.ArgumentParser:
    """Options accepted before the subcommand and by every subcommand.

    The subcommand copy leaves unset flags out of the namespace so values given
    before the subcommand survive; its ``--set`` values are collected apart
    and appended by ``parse_args``.
    """
    common = argparse.ArgumentParser(
        add_help=False, argument_default=None if global_flags else argparse.SUPPRESS
    )

    common.add_argument(
        "--config",
        "-c",
        type=str,
        help="Path to configuration file (default: ./config/config.yaml)",
        metavar="PATH",
    )

    common.add_argument(
        "--out",
        type=str,
        help="Output directory (overrides output.directory)",
        metavar="DIR",
    )

    common.add_argument(
        "--span",
        type=str,
        help="Trading span as START:END (ISO dates, either side may be empty) or a preset "
        "(bear, bull)",
        metavar="SPAN",
    )

    common.add_argument(
        "--stop-mode",
        type=str,
        choices=["trailing-max", "prev-close"],
        help="Trailing stop reference (overrides strategy.stop_mode)",
    )

    common.add_argument(
        "--buy-threshold",
        type=float,
        help="Leader close ratio that triggers a buy (overrides strategy.buy_threshold)",
        metavar="RATIO",
    )

    common.add_argument(
        "--trailing-stop",
        type=float,
        help="Leader drawdown fraction that triggers a sell (overrides strategy.trailing_stop)",
        metavar="FRACTION",
    )

    common.add_argument(
        "--set",
        dest="overrides" if global_flags else "command_overrides",
        action="append",
        default=[],
        help="Override any setting by dotted key, e.g. --set detection.epsilon=0.02 "
        "(repeatable)",
        metavar="KEY=VALUE",
    )

    common.add_argument(
        "--log-level",
        type=str,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Override logging level from config (default: from config)",
        metavar="LEVEL",
    )

    return common


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for CLI.

    Returns:
        Configured argument parser
    """
    parser = argparse.ArgumentParser(
        prog="leadlag-engine",
        parents=[_common_options(global_flags=True)],
        description="Lead-lag network detection, pair selection and strategy backtesting",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Generate a synthetic universe into ./output
  python -m app synth --set synth.tickers=8 --set synth.days=600

  # Export the lead-lag network for a price file
  python -m app network --set data.prices=data/prices.csv

  # Backtest the bear-market span with a 5% trailing stop
  python -m app backtest -c config/config.yaml --span bear --trailing-stop 0.05

  # Sweep the parameter grid with debug logging
  python -m app sweep -c config/config.yaml --log-level DEBUG
        """,
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"Lead-Lag Engine v{__version__}",
    )

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    common = _common_options(global_flags=False)
    for name, help_text in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)

    return parser


def parse_args(args: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments.

    Args:
        args: List of argument strings (default: sys.argv[1:])

    Returns:
        Parsed arguments namespace
    """
    parser = create_parser()
    namespace = parser.parse_args(args)
    namespace.overrides = namespace.overrides + namespace.command_overrides
    return namespace


def validate_args(args: argparse.Namespace) -> bool:
    """Validate parsed arguments.

    Args:
        args: Parsed arguments namespace

    Returns:
        True if valid, False otherwise
    """
    if args.config:
        config_path = Path(args.config)
        if not config_path.exists():
            print(
                f"Error: Configuration file not found: {args.config}", file=sys.stderr
            )
            return False

    for assignment in args.overrides:
        if "=" not in assignment:
            print(f"Error: --set expects KEY=VALUE, got {assignment!r}", file=sys.stderr)
            return False

    return True
