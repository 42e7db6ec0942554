"""
CLI for skelpair

Auto-discovers registered actions and exposes them as CLI commands.
Command modules only need to use the @action and @all_action decorators.

Usage:
    skelpair [--format json|csv] [--output PATH] [-v] <category> [<action>] [args...]

Examples:
    skelpair chow table --d 2
    skelpair chow vanishing --d 3
    skelpair --format csv converge --levels 2,4,8 --graph I.json --d 2 f.json f.json f.json
    skelpair demo counterexample --n 5  # Exact pairing 2n = 10/1
    skelpair all  # Run every self-check

Exit codes: 0 success, 1 failed verdict or unexpected error, 2 usage error,
3 invalid input, 4 computation error, 130 interrupted.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from dataclasses import dataclass
from functools import wraps
from pathlib import Path
from typing import Callable

import defopt  # type: ignore
import logfire

from skelpair.errors import MalformedDocument, SkelpairError
from skelpair.models import SkelModel
from skelpair.output import OutputFormat, emit_report
from skelpair.pairing import default_threads

EXIT_USAGE = 2


# =============================================================================
# Global Configuration
# =============================================================================

@dataclass
class GlobalConfig:
    """Global configuration set before subcommand dispatch."""

    format: OutputFormat = "json"
    """Report format."""

    output: str | None = None
    """Report path; stdout when unset."""

    verbose: bool = False
    """Log to the console."""

    threads: int = 1
    """Worker threads for the limit pairing."""


# Singleton instance - set by parse_global_args()
CONFIG: GlobalConfig = GlobalConfig()


class RunConfig(SkelModel):
    """The resolved run of one action, recorded in report metadata."""

    command: str
    graph: str | None = None
    functions: list[str] = []
    d: int | None = None
    n: int | None = None
    levels: list[int] | None = None
    m: int | None = None
    format: str = "json"
    output: str | None = None
    verbose: bool = False
    threads: int = 1


def run_config(command: str, **fields) -> RunConfig:
    """
    Combine an action's arguments with the global options.

    Raises:
        MalformedDocument: a referenced input file does not exist
    """
    for path in [fields.get("graph"), *fields.get("functions", [])]:
        if path is not None and not Path(path).is_file():
            raise MalformedDocument(str(path), "no such file")
    return RunConfig(command=command, format=CONFIG.format, output=CONFIG.output,
                     verbose=CONFIG.verbose, threads=CONFIG.threads, **fields)


def create_global_parser() -> argparse.ArgumentParser:
    """Create the global argument parser with all options."""
    parser = argparse.ArgumentParser(
        prog="skelpair",
        description="Intersection pairings on products of metrized graphs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        add_help=False,  # We'll handle help manually to append category info
    )
    parser.add_argument("--format", "-f", choices=["json", "csv"], default="json",
                        help="Report format (default json)")
    parser.add_argument("--output", "-o", default=None,
                        help="Write the report to this file instead of stdout")
    parser.add_argument("--verbose", "-v", action="store_true",
                        help="Log progress to the console")
    parser.add_argument("--threads", type=int, default=default_threads(),
                        help="Worker threads (or set SKELPAIR_THREADS env var)")
    parser.add_argument("--help", "-h", action="store_true",
                        help="Show this help message and exit")
    return parser


def print_global_help(parser: argparse.ArgumentParser):
    """Print argparse help plus available categories and actions."""
    import_all_categories()
    from skelpair.registry import get_categories, list_actions

    parser.print_help()

    print("\nCommands:")
    print("    all                    Run every self-check")
    print("    <category> all         Run the self-check of a category")
    print("    <category> <action>    Run a specific action (add --help for its options)")

    print("\nCategories:")
    for cat in get_categories():
        print(f"    {cat:<20} Actions: {', '.join(list_actions(cat))}")

    print("""
Examples:
    skelpair chow vanishing --d 2
    skelpair pair exact --graph I.json --d 1 --n 4 f.json g.json
    skelpair demo counterexample --n 5  # Exact pairing 2n = 10/1
""")


def parse_global_args(argv: list[str]) -> tuple[GlobalConfig, list[str]]:
    """
    Parse global arguments before the subcommand.

    Global options must precede the category; everything from the first
    unrecognised token on is left for the action.
    """
    parser = create_global_parser()
    split = next((i for i, arg in enumerate(argv) if not arg.startswith("-") and not _is_option_value(argv, i)),
                 len(argv))
    args = parser.parse_args(argv[:split])

    if args.help:
        print_global_help(parser)
        sys.exit(0)
    if args.threads < 1:
        parser.error("--threads must be positive")

    return GlobalConfig(
        format=args.format,
        output=args.output,
        verbose=args.verbose,
        threads=args.threads,
    ), argv[split:]


def _is_option_value(argv: list[str], i: int) -> bool:
    return i > 0 and argv[i - 1] in {"--format", "-f", "--output", "-o", "--threads"}


def configure_logging(verbose: bool) -> None:
    logfire.configure(
        send_to_logfire="if-token-present",
        scrubbing=False,
        console=logfire.ConsoleOptions(min_log_level="debug") if verbose else False,
    )


# =============================================================================
# Action Wrapper for defopt
# =============================================================================

def create_action_wrapper(func: Callable) -> Callable:
    """
    Wrap an action function for use with defopt.

    - Emits a returned report with the global format and output
    - Maps the report's verdict (if it has one) or a returned int to the exit code
    - Preserves signature, docstring, and type hints for defopt
    """
    sig = inspect.signature(func)

    @wraps(func)
    def wrapper(*args, **kwargs) -> int:
        result = func(*args, **kwargs)
        if isinstance(result, int):
            return result
        if isinstance(result, SkelModel):
            emit_report(result, CONFIG.format, CONFIG.output)
            return getattr(result, "exit_code", 0)
        if result is not None:
            print(result)
        return 0

    wrapper.__signature__ = sig  # type: ignore
    return wrapper


# =============================================================================
# Category Discovery and Import
# =============================================================================

def import_all_categories():
    """Import all command modules to trigger registration."""
    from skelpair import commands  # noqa: F401


# =============================================================================
# Main Entry Point
# =============================================================================

def run_action(func: Callable, args: list[str] | None = None) -> int:
    """Run an action function with defopt argument parsing."""
    wrapped = create_action_wrapper(func)
    return defopt.run(wrapped, argv=args or [])


def _report_error(e: SkelpairError) -> int:
    print(json.dumps(e.to_json(), sort_keys=True), file=sys.stderr)
    return e.exit_code


def _usage(message: str) -> int:
    print(json.dumps({"error": "UsageError", "message": message, "detail": {}}, sort_keys=True), file=sys.stderr)
    return EXIT_USAGE


def main(argv: list[str] | None = None) -> int:
    """Main entry point."""
    global CONFIG

    argv = sys.argv[1:] if argv is None else argv
    import_all_categories()
    from skelpair.registry import get_actions, get_all_func, get_categories, get_default_action, list_actions

    try:
        CONFIG, remaining = parse_global_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    configure_logging(CONFIG.verbose)

    if not remaining:
        return _usage(f"usage: skelpair [options] <category> [<action>] [args...]; "
                      f"categories: {', '.join(get_categories())}")

    category, *remaining = remaining

    try:
        # Run all categories
        if category == "all":
            results = []
            for c in get_categories():
                if f := get_all_func(c):
                    logfire.info(f"Running {c} self-check")
                    results.append(run_action(f))
            return max(results, default=0)

        if category not in get_categories():
            return _usage(f"unknown category: {category}. Available: {', '.join(get_categories())}")

        default = get_default_action(category)
        if not remaining or remaining[0].startswith("-"):
            action, action_args = (default, remaining) if default and remaining else ("all", remaining)
        else:
            action, action_args = remaining[0], remaining[1:]

        # Run category's "all" action
        if action == "all":
            if func := get_all_func(category):
                return run_action(func)
            return _usage(f"no 'all' action for {category}")

        actions = get_actions(category)
        if action not in actions:
            return _usage(f"unknown action: {action}. Available: {', '.join(list_actions(category))}")

        return run_action(actions[action], action_args)

    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return 130
    except SkelpairError as e:
        logfire.error(f"{type(e).__name__}: {e}")
        return _report_error(e)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else _usage(str(e.code))
    except Exception as e:
        logfire.error(f"Error: {e}")
        print(json.dumps({"error": type(e).__name__, "message": str(e), "detail": {}}, sort_keys=True),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
