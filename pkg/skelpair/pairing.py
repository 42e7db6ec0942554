"""
Intersection pairings of functions on |Gamma^d|.

pair_exact computes the pairing of lattice functions at level n exactly:

    <f_0..f_d>_n = n^{2d} sum_{v_0..v_d} ldeg(prod F_{v_i}) int prod lattice_delta(f_i, v_i)

pair_limit computes the limit n -> oo for expression functions as a sum over
generalized diagonals of integrals of generalized differentials. pair_zhang2
and pair_cube3 are the closed forms for surfaces and for cube-smooth threefolds.

Usage:
    from skelpair.pairing import PairingContext, pair_exact, pair_limit

    ctx = PairingContext.build(2)
    pair_exact([grid0, grid1, grid2], ctx.table).value     # Fraction
    pair_limit([f0, f1, f2], ctx).value                    # float
"""

from __future__ import annotations

import itertools
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import logfire
from pydantic import Field

from skelpair.chowring import (
    DegreeTable,
    VanishingReport,
    build_degree_table,
    check_vanishing,
    f_degree,
    nonzero_tuples,
)
from skelpair.errors import (
    DegreeMismatch,
    LevelMismatch,
    MalformedDocument,
    SmoothnessClassMismatch,
    TooLarge,
    VanishingConditionUnverified,
)
from skelpair.funcspace import (
    ExprFunction,
    GridFunction,
    Smoothness,
    differential_field,
    integrate_diagonal,
    integrate_grid_product_split,
    standard_approximation,
)
from skelpair.models import ExactOrReal, Rational, SkelModel
from skelpair.skeleton import BitVec, Chart, Graph, Partition, all_partitions, alpha, standard_interval
from skelpair.utils import bits_label, compact_dict, format_rational, format_value

DEFAULT_M = {1: 64, 2: 64, 3: 16}
"""Midpoint-rule points per axis by dimension."""

MAX_LIMIT_D = 3

CUBE3_MULTISETS = [
    ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)),
    ((1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)),
    ((1, 0, 0), (0, 0, 1), (1, 1, 0), (0, 1, 1)),
    ((0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1)),
]
"""Multisets of F-generators with nonzero degree and total weight 6 in dimension 3."""

ZHANG_MULTISET = ((0, 1), (1, 0), (1, 1))


def default_threads() -> int:
    """Worker count from SKELPAIR_THREADS, else 1."""
    try:
        return max(1, int(os.getenv("SKELPAIR_THREADS", "1")))
    except ValueError:
        return 1


# =============================================================================
# Reports
# =============================================================================

class PairingTerm(SkelModel):
    """Contribution of one (partition, tuple) to a pairing."""

    partition: list[list[int]]
    tuple_: list[str] = Field(alias="tuple")
    ldeg: Rational
    integral: ExactOrReal
    contribution: ExactOrReal


class PairingReport(SkelModel):
    """A pairing value with its term decomposition; value is the sum of contributions."""

    value: ExactOrReal
    terms: list[PairingTerm]
    meta: dict[str, Any] = {}

    def csv_header(self) -> list[str]:
        return ["partition", "tuple", "ldeg", "integral", "contribution"]

    def csv_rows(self) -> list[list[str]]:
        return [[str(Partition.from_blocks(t.partition)), " ".join(t.tuple_), format_rational(t.ldeg),
                 format_value(t.integral), format_value(t.contribution)] for t in self.terms]


class ZhangSplit(SkelModel):
    """Smooth and singular parts of the surface pairing."""

    smooth: float
    singular: float
    total: float
    terms: list[PairingTerm]
    meta: dict[str, Any] = {}

    def csv_header(self) -> list[str]:
        return ["part", "value"]

    def csv_rows(self) -> list[list[str]]:
        return [[name, repr(getattr(self, name))] for name in ("smooth", "singular", "total")]


class ConvergenceRow(SkelModel):
    n: int
    exact: Rational
    limit: float
    gap: float


class ConvergenceTable(SkelModel):
    """Exact pairings of standard approximations against the limit value."""

    rows: list[ConvergenceRow]
    meta: dict[str, Any] = {}

    def csv_header(self) -> list[str]:
        return ["n", "exact", "limit", "gap"]

    def csv_rows(self) -> list[list[str]]:
        return [[str(r.n), format_rational(r.exact), repr(r.limit), repr(r.gap)] for r in self.rows]


class DemoRow(SkelModel):
    name: str
    value: Rational
    expected: Rational
    passed: bool


class DemoReport(SkelModel):
    """Computed values of a demo next to their closed forms."""

    demo: str
    rows: list[DemoRow]

    @property
    def exit_code(self) -> int:
        return 0 if all(r.passed for r in self.rows) else 1

    def csv_header(self) -> list[str]:
        return ["name", "value", "expected", "passed"]

    def csv_rows(self) -> list[list[str]]:
        return [[r.name, format_rational(r.value), format_rational(r.expected), str(r.passed).lower()]
                for r in self.rows]


# =============================================================================
# Context
# =============================================================================

@dataclass(frozen=True)
class PairingContext:
    """A degree table with the outcome of its vanishing check."""

    table: DegreeTable
    vanishing: VanishingReport | None = None

    @property
    def d(self) -> int:
        return self.table.d

    @classmethod
    def build(cls, d: int, verify: bool = True) -> PairingContext:
        table = build_degree_table(d)
        return cls(table, check_vanishing(d, table) if verify else None)


def _tuple_labels(tup: Sequence[BitVec]) -> list[str]:
    return [bits_label(v) for v in tup]


def _common_shape(fs: Sequence[GridFunction | ExprFunction], d: int) -> Graph:
    if len(fs) != d + 1:
        raise DegreeMismatch(d + 1, len(fs), what="number of functions")
    graph = fs[0].graph
    for f in fs:
        if f.d != d:
            raise DegreeMismatch(d, f.d, what="dimension")
        if f.graph != graph:
            raise MalformedDocument(f.graph.name, f"functions live on different graphs ({graph.name})")
    return graph


# =============================================================================
# Exact pairing
# =============================================================================

def pair_exact(fs: Sequence[GridFunction], t: DegreeTable) -> PairingReport:
    """
    The exact pairing of d+1 lattice functions at a common level n.

    Terms are split by the partition of the cell centres, so the report has the
    (partition, tuple) structure of the limit pairing.

    Raises:
        LevelMismatch: the grids have different levels
        DegreeMismatch: wrong number of grids or dimension
    """
    d = t.d
    graph = _common_shape(fs, d)
    n = fs[0].n
    for f in fs:
        if f.n != n:
            raise LevelMismatch(n, f.n)

    with logfire.span("exact pairing d={d} n={n}", d=d, n=n):
        scale = Fraction(n) ** (2 * d)
        terms: list[PairingTerm] = []
        value = Fraction(0)
        for tup in nonzero_tuples(t):
            coefficient = f_degree(d, tup, t)
            split = integrate_grid_product_split(list(zip(fs, tup)), n)
            for p, integral in split.items():
                if not integral:
                    continue
                contribution = scale * coefficient * integral
                value += contribution
                terms.append(PairingTerm(partition=p.to_json(), tuple_=_tuple_labels(tup), ldeg=coefficient,
                                         integral=integral, contribution=contribution))
        terms.sort(key=lambda term: (Partition.from_blocks(term.partition).sort_key(), term.tuple_))
        logfire.debug(f"exact pairing: {len(terms)} nonzero terms, value {format_rational(value)}")
        return PairingReport(value=value, terms=terms,
                             meta=compact_dict(method="exact", d=d, n=n, graph=graph.name))


# =============================================================================
# Limit pairing
# =============================================================================

class _DifferentialCache:
    """D^v_a f_i on the quadrature nodes of one partition, per chart."""

    def __init__(self, fs: Sequence[ExprFunction]):
        self.fs = fs
        self.values: dict[tuple, Any] = {}

    def product(self, chart: Chart, points, tup: Sequence[BitVec], degrees: Sequence[int]):
        out = None
        for i, (v, a) in enumerate(zip(tup, degrees)):
            key = (chart, i, v, a)
            if key not in self.values:
                self.values[key], _ = differential_field(self.fs[i], chart, points, v, a)
            out = self.values[key] if out is None else out * self.values[key]
        return out


def _partition_terms(
    fs: Sequence[ExprFunction],
    graph: Graph,
    d: int,
    p: Partition,
    tuples: Sequence[tuple[BitVec, ...]],
    t: DegreeTable,
    m: int,
) -> list[PairingTerm]:
    target = d + p.size
    weight = Fraction(1, 2 ** target)
    cache = _DifferentialCache(fs)
    terms = []
    for tup in tuples:
        degrees = [alpha(p, v) for v in tup]
        if sum(degrees) != target:
            continue
        coefficient = f_degree(d, tup, t)
        integral = integrate_diagonal(
            graph, d, p, lambda chart, points: cache.product(chart, points, tup, degrees), m)
        terms.append(PairingTerm(partition=p.to_json(), tuple_=_tuple_labels(tup), ldeg=coefficient,
                                 integral=integral, contribution=float(weight * coefficient) * integral))
    logfire.debug(f"partition {p}: {len(terms)} terms")
    return terms


def pair_limit(
    fs: Sequence[ExprFunction],
    ctx: PairingContext,
    m: int | None = None,
    threads: int | None = None,
    max_d: int = MAX_LIMIT_D,
) -> PairingReport:
    """
    The limit of the exact pairings of the standard approximations.

    Sums over partitions P and tuples with sum_i alpha(P, v_i) = d + |P| of
    2^-(d+|P|) ldeg(prod F_{v_i}) times the integral over D_P of the product of
    generalized differentials. Partitions are evaluated concurrently and
    reduced in canonical order.

    Raises:
        VanishingConditionUnverified: the context carries no passed vanishing check
        TooLarge: d above `max_d`
    """
    d = ctx.d
    if ctx.vanishing is None:
        raise VanishingConditionUnverified(d, "check was skipped")
    if not ctx.vanishing.passed:
        raise VanishingConditionUnverified(d, f"{len(ctx.vanishing.violations)} violation(s)")
    if d > max_d:
        raise TooLarge("d", d, max_d)
    graph = _common_shape(fs, d)
    m = m or DEFAULT_M.get(d, 16)
    threads = threads or default_threads()

    with logfire.span("limit pairing d={d} m={m}", d=d, m=m):
        tuples = nonzero_tuples(ctx.table)
        partitions = all_partitions(d)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda p: _partition_terms(fs, graph, d, p, tuples, ctx.table, m), partitions))
        terms = [term for chunk in chunks for term in chunk]
        value = float(sum(term.contribution for term in terms))
        warnings = [w for f in fs for w in f.warnings]
        logfire.info(f"limit pairing d={d}: {len(terms)} terms, value {value!r}")
        return PairingReport(value=value, terms=terms,
                             meta=compact_dict(method="limit", d=d, m=m, graph=graph.name,
                                               warnings=warnings or None))


def _diagonal_product_integral(
    fs: Sequence[ExprFunction], p: Partition, tup: Sequence[BitVec], degrees: Sequence[int], m: int
) -> float:
    cache = _DifferentialCache(fs)
    return integrate_diagonal(fs[0].graph, fs[0].d, p,
                              lambda chart, points: cache.product(chart, points, tup, degrees), m)


def pair_zhang2(f0: ExprFunction, f1: ExprFunction, f2: ExprFunction, m: int | None = None) -> ZhangSplit:
    """
    The surface pairing as smooth plus singular part.

    Coefficients are the F-degrees of the d=2 table (16 and -32):

    smooth   = sum over orderings of {10, 01, 11} of int prod D^{v_i}_{|v_i|}(f_i)
    singular = 2 sum over the same orderings of int_D prod D^{v_i}_1(f_i)
               - 4 int_D prod D^{11}_1(f_i)
    """
    fs = [f0, f1, f2]
    graph = _common_shape(fs, 2)
    m = m or DEFAULT_M[2]
    table = build_degree_table(2)
    discrete, diagonal = Partition.discrete(2), Partition.coarsest(2)
    with logfire.span("surface pairing m={m}", m=m):
        terms = []
        smooth = singular = 0.0
        orderings = sorted(set(itertools.permutations(ZHANG_MULTISET)))
        for tup in orderings:
            coefficient = f_degree(2, tup, table)
            integral = _diagonal_product_integral(fs, discrete, tup, [sum(v) for v in tup], m)
            contribution = float(coefficient) / 16 * integral
            smooth += contribution
            terms.append(PairingTerm(partition=discrete.to_json(), tuple_=_tuple_labels(tup), ldeg=coefficient,
                                     integral=integral, contribution=contribution))
        for tup in orderings + [((1, 1),) * 3]:
            coefficient = f_degree(2, tup, table)
            integral = _diagonal_product_integral(fs, diagonal, tup, [1, 1, 1], m)
            contribution = float(coefficient) / 8 * integral
            singular += contribution
            terms.append(PairingTerm(partition=diagonal.to_json(), tuple_=_tuple_labels(tup), ldeg=coefficient,
                                     integral=integral, contribution=contribution))
        return ZhangSplit(smooth=smooth, singular=singular, total=smooth + singular, terms=terms,
                          meta=compact_dict(method="zhang2", d=2, m=m, graph=graph.name))


def pair_cube3(fs: Sequence[ExprFunction], m: int | None = None) -> PairingReport:
    """
    The threefold pairing of cube-smooth functions: 2^-6 ldeg(prod F_{v_i}) times the
    integral over Gamma^3 of prod D^{v_i}_{|v_i|}(f_i), summed over ordered tuples in
    CUBE3_MULTISETS. The degree is -64 on each of these multisets, so the value is
    minus the integral of the summed products.

    Raises:
        SmoothnessClassMismatch: an input is declared smooth only on simplices
    """
    graph = _common_shape(fs, 3)
    for f in fs:
        if f.smooth != Smoothness.CUBES:
            raise SmoothnessClassMismatch(Smoothness.CUBES.value, f.smooth.value)
    m = m or DEFAULT_M[3]
    table = build_degree_table(3)
    discrete = Partition.discrete(3)
    wanted = {tuple(sorted(ms)) for ms in CUBE3_MULTISETS}
    with logfire.span("cube pairing m={m}", m=m):
        terms = []
        for tup in itertools.product(itertools.product((0, 1), repeat=3), repeat=4):
            if tuple(sorted(tup)) not in wanted:
                continue
            coefficient = f_degree(3, tup, table)
            integral = _diagonal_product_integral(fs, discrete, tup, [sum(v) for v in tup], m)
            terms.append(PairingTerm(partition=discrete.to_json(), tuple_=_tuple_labels(tup), ldeg=coefficient,
                                     integral=integral, contribution=float(coefficient) / 64 * integral))
        value = float(sum(term.contribution for term in terms))
        return PairingReport(value=value, terms=terms,
                             meta=compact_dict(method="cube3", d=3, m=m, graph=graph.name))


# =============================================================================
# Convergence
# =============================================================================

def convergence_table(
    fs: Sequence[ExprFunction],
    levels: Sequence[int],
    ctx: PairingContext,
    m: int | None = None,
    threads: int | None = None,
) -> ConvergenceTable:
    """
    Exact pairings of the standard approximations at each level against the limit.

    Raises:
        ValueError: levels not strictly ascending
    """
    if not levels or any(a >= b for a, b in itertools.pairwise(levels)):
        raise ValueError(f"levels must be ascending, got {list(levels)}")
    limit = pair_limit(fs, ctx, m=m, threads=threads)
    rows = []
    for n in levels:
        with logfire.span("convergence level n={n}", n=n):
            grids = [standard_approximation(f, n) for f in fs]
            exact = pair_exact(grids, ctx.table).value
            assert isinstance(exact, Fraction)
            limit_value = float(limit.value)
            rows.append(ConvergenceRow(n=n, exact=exact, limit=limit_value, gap=abs(float(exact) - limit_value)))
            logfire.info(f"n={n}: exact {format_rational(exact)}, gap {rows[-1].gap:.3e}")
    return ConvergenceTable(rows=rows, meta=compact_dict(d=ctx.d, m=limit.meta.get("m"),
                                                         graph=fs[0].graph.name, levels=list(levels)))


# =============================================================================
# Demos
# =============================================================================

def triangle_wave(n: int, t: Fraction) -> Fraction:
    """
    (1/2) sum_{i=-n..n} (-1)^i max(0, 1/n - |t - i/n|) for t in [-1, 1].

    Piecewise affine with value (-1)^i / (2n) at i/n; even in t.
    """
    t = Fraction(t)
    total = Fraction(0)
    for i in range(-n, n + 1):
        bump = Fraction(1, n) - abs(t - Fraction(i, n))
        if bump > 0:
            total += (-1) ** (i % 2) * bump
    return total / 2


def counterexample_triple(n: int) -> tuple[list[GridFunction], Fraction]:
    """
    The triangle-wave triple on I^2 at level n and its exact pairing.

    f0 = w(x1), f1 = w(x2), f2 = w(x1 - x2) with w the triangle wave of level n.
    """
    if n < 1:
        raise ValueError("n must be positive")
    graph = standard_interval()
    formulas = [
        lambda i, j: triangle_wave(n, Fraction(i, n)),
        lambda i, j: triangle_wave(n, Fraction(j, n)),
        lambda i, j: triangle_wave(n, Fraction(i - j, n)),
    ]
    grids = [GridFunction.from_vertex_function(graph, 2, n, lambda chart, index, fn=fn: fn(*index))
             for fn in formulas]
    value = pair_exact(grids, build_degree_table(2)).value
    assert isinstance(value, Fraction)
    return grids, value


def d1_integral(f0: GridFunction, f1: GridFunction) -> Fraction:
    """-int (D^1 f0)(D^1 f1) for piecewise-affine functions on a graph, cell by cell."""
    if f0.d != 1 or f1.d != 1:
        raise DegreeMismatch(1, max(f0.d, f1.d), what="dimension")
    if f0.n != f1.n:
        raise LevelMismatch(f0.n, f1.n)
    n = f0.n
    total = Fraction(0)
    for chart, a in f0.values.items():
        b = f1.values[chart]
        for i in range(n):
            total += (a[i + 1] - a[i]) * (b[i + 1] - b[i])
    return -n * total


def counterexample_demo(levels: Sequence[int]) -> DemoReport:
    rows = []
    for n in levels:
        _, value = counterexample_triple(n)
        rows.append(DemoRow(name=f"n={n}", value=value, expected=Fraction(2 * n), passed=value == 2 * n))
    return DemoReport(demo="counterexample", rows=rows)


def d1_demo(n: int = 8, seed: int = 0, count: int = 100) -> DemoReport:
    """Exact d=1 pairings of random piecewise-affine pairs on I against -int D f0 D f1."""
    rng = random.Random(seed)
    graph = standard_interval()
    table = build_degree_table(1)
    rows = []
    for k in range(count):
        level = rng.randint(1, n)
        pair = [GridFunction.from_vertex_function(
                    graph, 1, level, lambda chart, index: Fraction(rng.randint(-20, 20), rng.randint(1, 9)))
                for _ in range(2)]
        value = pair_exact(pair, table).value
        expected = d1_integral(*pair)
        assert isinstance(value, Fraction)
        rows.append(DemoRow(name=f"pair {k} n={level}", value=value, expected=expected, passed=value == expected))
    return DemoReport(demo="d1-fakt", rows=rows)
