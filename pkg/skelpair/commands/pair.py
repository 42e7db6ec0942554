"""Pairings of function files: exact, limit and the closed forms."""

import logfire

from skelpair import cli
from skelpair.chowring import build_degree_table
from skelpair.errors import LevelMismatch, MalformedDocument
from skelpair.funcspace import ExprFunction, GridFunction, standard_approximation
from skelpair.inputs import load_function, load_graph
from skelpair.pairing import (
    PairingContext,
    PairingReport,
    ZhangSplit,
    pair_cube3,
    pair_exact,
    pair_limit,
    pair_zhang2,
)
from skelpair.registry import action, all_action
from skelpair.skeleton import standard_interval


def load_inputs(graph: str, d: int, functions: tuple[str, ...]) -> list[ExprFunction | GridFunction]:
    g = load_graph(graph)
    return [load_function(path, g, d) for path in functions]


def expressions_only(fs: list[ExprFunction | GridFunction], paths: tuple[str, ...]) -> list[ExprFunction]:
    out = []
    for f, path in zip(fs, paths):
        if not isinstance(f, ExprFunction):
            raise MalformedDocument(path, "this pairing needs an expression function")
        out.append(f)
    return out


def with_run(report, run: cli.RunConfig):
    return report.model_copy(update={"meta": {**report.meta, "run": run.model_dump(mode="json")}})


@action("exact")
def exact(*functions: str, graph: str, d: int, n: int) -> PairingReport:
    """
    Exact pairing at level n; expression files are replaced by their standard approximation.

    :param functions: d+1 function files.
    :param graph: Graph file.
    :param d: Power of the graph.
    :param n: Subdivision level.
    """
    run = cli.run_config("pair exact", graph=graph, functions=list(functions), d=d, n=n)
    grids = []
    for f in load_inputs(graph, d, functions):
        if isinstance(f, GridFunction) and f.n != n:
            raise LevelMismatch(n, f.n)
        grids.append(standard_approximation(f, n))
    return with_run(pair_exact(grids, build_degree_table(d)), run)


@action("limit")
def limit(*functions: str, graph: str, d: int, m: int | None = None) -> PairingReport:
    """
    Limit pairing of expression functions.

    :param functions: d+1 expression files.
    :param graph: Graph file.
    :param d: Power of the graph (at most 3).
    :param m: Quadrature points per axis.
    """
    run = cli.run_config("pair limit", graph=graph, functions=list(functions), d=d, m=m)
    fs = expressions_only(load_inputs(graph, d, functions), functions)
    return with_run(pair_limit(fs, PairingContext.build(d), m=m, threads=cli.CONFIG.threads), run)


@action("zhang2")
def zhang2(*functions: str, graph: str, m: int | None = None) -> ZhangSplit:
    """
    Surface pairing split into smooth and singular part.

    :param functions: Three expression files on Gamma^2.
    :param graph: Graph file.
    :param m: Quadrature points per axis.
    """
    run = cli.run_config("pair zhang2", graph=graph, functions=list(functions), d=2, m=m)
    fs = expressions_only(load_inputs(graph, 2, functions), functions)
    if len(fs) != 3:
        raise MalformedDocument("pair zhang2", f"expected 3 function files, got {len(fs)}")
    return with_run(pair_zhang2(*fs, m=m), run)


@action("cube3")
def cube3(*functions: str, graph: str, m: int | None = None) -> PairingReport:
    """
    Threefold pairing of cube-smooth functions.

    :param functions: Four expression files on Gamma^3 declared smooth on cubes.
    :param graph: Graph file.
    :param m: Quadrature points per axis.
    """
    run = cli.run_config("pair cube3", graph=graph, functions=list(functions), d=3, m=m)
    fs = expressions_only(load_inputs(graph, 3, functions), functions)
    return with_run(pair_cube3(fs, m=m), run)


@all_action
def all() -> int:
    """Check the exact and limit pairings against their closed forms on the standard interval."""
    g = standard_interval()
    failures = 0

    def expr(d: int, text: str, smooth: str = "cubes") -> ExprFunction:
        return ExprFunction.build(g, d, smooth, {"*": text})

    x = expr(1, "x1")
    value = pair_exact([standard_approximation(x, 1)] * 2, build_degree_table(1)).value
    if value == -1:
        logfire.info("✓ d=1 exact pairing of x1 with itself is -1")
    else:
        failures += 1
        logfire.error(f"d=1 exact pairing is {value}, expected -1")

    limit_value = pair_limit([x, x], PairingContext.build(1)).value
    if abs(limit_value + 1) < 1e-9:
        logfire.info("✓ d=1 limit pairing agrees with the exact one")
    else:
        failures += 1
        logfire.error(f"d=1 limit pairing is {limit_value}, expected -1")

    xy = expr(2, "x1*x2")
    surface = pair_limit([xy] * 3, PairingContext.build(2)).value
    split = pair_zhang2(xy, xy, xy)
    if abs(surface - 1.5) < 1e-6 and abs(split.total - surface) < 1e-9 and abs(split.singular) < 1e-9:
        logfire.info(f"✓ d=2 limit pairing of x1*x2 is 3/2 (smooth {split.smooth:.9f}, singular {split.singular:.1e})")
    else:
        failures += 1
        logfire.error(f"d=2 limit {surface}, split {split.smooth} + {split.singular}")

    coordinates = [expr(3, "x1"), expr(3, "x2"), expr(3, "x3"), expr(3, "x1*x2*x3")]
    cube = pair_cube3(coordinates).value
    threefold = pair_limit(coordinates, PairingContext.build(3)).value
    if abs(cube + 1) < 1e-6 and abs(cube - threefold) < 1e-6:
        logfire.info("✓ d=3 cube pairing of (x1, x2, x3, x1*x2*x3) is -1 and matches the limit pairing")
    else:
        failures += 1
        logfire.error(f"d=3 cube pairing is {cube}, limit pairing {threefold}, expected -1")

    return 1 if failures else 0
