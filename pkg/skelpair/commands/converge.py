"""Convergence of the exact pairings of standard approximations to the limit pairing."""

import builtins
import itertools

import logfire

from skelpair import cli
from skelpair.commands.pair import expressions_only, load_inputs, with_run
from skelpair.funcspace import ExprFunction
from skelpair.pairing import ConvergenceTable, PairingContext, convergence_table
from skelpair.registry import action, all_action
from skelpair.skeleton import standard_interval


def parse_levels(levels: str) -> list[int]:
    try:
        parsed = [int(part) for part in levels.split(",") if part.strip()]
    except ValueError as e:
        raise SystemExit(f"--levels must be comma-separated integers, got {levels!r}") from e
    if not parsed or any(n < 1 for n in parsed) or any(a >= b for a, b in itertools.pairwise(parsed)):
        raise SystemExit(f"--levels must be positive and ascending, got {levels!r}")
    return parsed


@action("table", default=True)
def table(*functions: str, graph: str, d: int, levels: str = "2,4,8,16", m: int | None = None) -> ConvergenceTable:
    """
    Exact pairing of the standard approximations per level against the limit.

    :param functions: d+1 expression files.
    :param graph: Graph file.
    :param d: Power of the graph (at most 3).
    :param levels: Ascending subdivision levels, comma separated.
    :param m: Quadrature points per axis for the limit.
    """
    ns = parse_levels(levels)
    run = cli.run_config("converge table", graph=graph, functions=list(functions), d=d, levels=ns, m=m)
    fs = expressions_only(load_inputs(graph, d, functions), functions)
    report = convergence_table(fs, ns, PairingContext.build(d), m=m, threads=cli.CONFIG.threads)
    return with_run(report, run)


@all_action
def all() -> int:
    """Check that the x1*x2 surface triple converges with shrinking gaps."""
    f = ExprFunction.build(standard_interval(), 2, "cubes", {"*": "x1*x2"})
    report = convergence_table([f] * 3, [4, 8, 16, 32], PairingContext.build(2))
    gaps = [row.gap for row in report.rows]
    if builtins.all(a > b > 0 for a, b in itertools.pairwise(gaps)) and gaps[-1] <= gaps[0] / 4:
        logfire.info(f"✓ gaps shrink from {gaps[0]:.3e} (n=4) to {gaps[-1]:.3e} (n=32)")
        return 0
    logfire.error(f"gaps do not shrink: {gaps}")
    return 1
