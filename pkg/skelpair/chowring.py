"""
The combinatorial Chow ring of the standard cube I^d and its local degree.

Vertices of I^d are bit vectors; a monomial is a sorted tuple of vertices (a
multiset). Products whose support is not a chain for the coordinatewise order
vanish. The local degree on degree-(d+1) monomials is computed once per d by
solving the linear relations exactly, then transformed to the Fourier generators
F_v = sum_w (-1)^<v,w> C_w.

Usage:
    from skelpair.chowring import build_degree_table, f_degree

    table = build_degree_table(2)
    f_degree(2, [(1, 1)] * 3, table)   # Fraction(-32, 1)
"""

from __future__ import annotations

import itertools
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import logfire
import numpy as np
from pydantic import Field
from sympy.utilities.iterables import multiset_permutations

from skelpair.errors import DegreeMismatch, InconsistentRelations, Timeout, TooLarge, Underdetermined
from skelpair.linsolve import CONSTANT, EliminationMatrix, Inconsistent
from skelpair.models import Rational, SkelModel
from skelpair.skeleton import BitVec, Partition, all_partitions, alpha
from skelpair.utils import bits_label

MAX_TABLE_D = 5
MAX_TENSOR_D = 4

type Monomial = tuple[BitVec, ...]


# =============================================================================
# Vertices, chains, monomials
# =============================================================================

def cube_vertices(d: int) -> list[BitVec]:
    """Vertices of I^d in lexicographic order (bit vector read as a binary number)."""
    return list(itertools.product((0, 1), repeat=d))


def vertex_index(v: BitVec) -> int:
    return int(bits_label(v), 2)


def leq(u: BitVec, w: BitVec) -> bool:
    return all(a <= b for a, b in zip(u, w))


def comparable(u: BitVec, w: BitVec) -> bool:
    return leq(u, w) or leq(w, u)


def is_chain(support: Iterable[BitVec]) -> bool:
    """True iff the vertices are pairwise comparable coordinatewise."""
    ordered = sorted(set(support), key=lambda v: (sum(v), v))
    return all(leq(u, w) for u, w in itertools.pairwise(ordered))


def canonical(vertices: Iterable[BitVec]) -> Monomial:
    return tuple(sorted(vertices))


def monomial_label(m: Monomial) -> str:
    return " ".join(bits_label(v) for v in m)


def _chains(d: int, max_length: int) -> Iterator[tuple[BitVec, ...]]:
    """Strictly increasing chains of I^d, each listed once, shortest first per start."""
    verts = cube_vertices(d)
    above = {u: [w for w in verts if w != u and leq(u, w)] for u in verts}

    def extend(chain: tuple[BitVec, ...]) -> Iterator[tuple[BitVec, ...]]:
        yield chain
        if len(chain) < max_length:
            for w in above[chain[-1]]:
                yield from extend(chain + (w,))

    for u in verts:
        yield from extend((u,))


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(b - a for a, b in itertools.pairwise(bounds))


def chain_monomials(d: int, degree: int) -> list[Monomial]:
    """All degree-`degree` monomials of I^d with chain support, sorted."""
    out = []
    for chain in _chains(d, min(degree, d + 1)):
        for mult in _compositions(degree, len(chain)):
            out.append(canonical(v for v, k in zip(chain, mult) for _ in range(k)))
    return sorted(out)


# =============================================================================
# Ring elements
# =============================================================================

@dataclass(frozen=True)
class ChowElement:
    """Homogeneous element of C(I^d): monomial -> nonzero rational coefficient."""

    d: int
    degree: int
    terms: Mapping[Monomial, Fraction] = field(default_factory=dict)

    @classmethod
    def zero(cls, d: int, degree: int) -> ChowElement:
        return cls(d, degree, {})

    @classmethod
    def vertex(cls, w: BitVec) -> ChowElement:
        return cls(len(w), 1, {(tuple(w),): Fraction(1)})

    @classmethod
    def from_terms(cls, d: int, degree: int, terms: Iterable[tuple[Monomial, Fraction | int]]) -> ChowElement:
        acc: dict[Monomial, Fraction] = {}
        for m, c in terms:
            m = canonical(m)
            acc[m] = acc.get(m, Fraction(0)) + Fraction(c)
        return cls(d, degree, {m: c for m, c in sorted(acc.items()) if c})

    def _check(self, other: ChowElement) -> None:
        if other.d != self.d:
            raise DegreeMismatch(self.d, other.d, what="dimension")

    def __add__(self, other: ChowElement) -> ChowElement:
        self._check(other)
        if self.terms and other.terms and other.degree != self.degree:
            raise DegreeMismatch(self.degree, other.degree)
        degree = self.degree if self.terms else other.degree
        return ChowElement.from_terms(self.d, degree, [*self.terms.items(), *other.terms.items()])

    def __neg__(self) -> ChowElement:
        return self.scale(-1)

    def __sub__(self, other: ChowElement) -> ChowElement:
        return self + (-other)

    def scale(self, c: Fraction | int) -> ChowElement:
        c = Fraction(c)
        if not c:
            return ChowElement.zero(self.d, self.degree)
        return ChowElement(self.d, self.degree, {m: c * k for m, k in self.terms.items()})

    def __mul__(self, other: ChowElement | Fraction | int) -> ChowElement:
        if isinstance(other, ChowElement):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = scale

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms.items():
            powers = Counter(m)
            mono = "*".join(f"C{bits_label(v)}" + (f"^{k}" if k > 1 else "") for v, k in sorted(powers.items()))
            parts.append(f"{c}*{mono}")
        return " + ".join(parts)


def expand_F(v: BitVec) -> ChowElement:
    """F_v = sum_w (-1)^<v,w> C_w."""
    d = len(v)
    terms = [((w,), (-1) ** (sum(a * b for a, b in zip(v, w)) % 2)) for w in cube_vertices(d)]
    return ChowElement.from_terms(d, 1, terms)


def multiply(a: ChowElement, b: ChowElement) -> ChowElement:
    """Graded product; monomials with non-chain support are dropped."""
    a._check(b)
    terms = []
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            m = ma + mb
            if is_chain(m):
                terms.append((m, ca * cb))
    return ChowElement.from_terms(a.d, a.degree + b.degree, terms)


def psi(e: ChowElement) -> ChowElement:
    """Replace every vertex C_v by C_{v + (1,...,1)}."""
    flipped = [(tuple(tuple(1 - b for b in v) for v in m), c) for m, c in e.terms.items()]
    return ChowElement.from_terms(e.d, e.degree, flipped)


# =============================================================================
# Degree table
# =============================================================================

@dataclass(frozen=True)
class DegreeTable:
    """Local degree of every chain-support degree-(d+1) monomial."""

    d: int
    entries: Mapping[Monomial, Fraction]

    def value(self, m: Iterable[BitVec]) -> Fraction:
        m = canonical(m)
        if len(m) != self.d + 1:
            raise DegreeMismatch(self.d + 1, len(m))
        return self.entries.get(m, Fraction(0))

    @cached_property
    def fourier(self) -> FDegreeTable:
        return fourier_degrees(self)

    @cached_property
    def _f_cache(self) -> dict[tuple[BitVec, ...], Fraction]:
        return {}


def _relation_rows(d: int, m: Monomial) -> Iterator[dict[Monomial, int]]:
    """
    Relation instances whose terms are m * C' for the chain monomial m of degree d.

    The sum over all C' is always one; for d >= 2, for each axis i and value b such
    that m has vertices with both values on axis i, the sum over C' with C'_i = b
    is another.
    """
    support = set(m)
    extensions = [w for w in cube_vertices(d) if all(comparable(w, u) for u in support)]
    yield {canonical(m + (w,)): 1 for w in extensions}
    if d < 2:
        return
    for i in range(d):
        values = {u[i] for u in support}
        if values != {0, 1}:
            continue
        for b in (0, 1):
            yield {canonical(m + (w,)): 1 for w in extensions if w[i] == b}


_TABLES: dict[int, DegreeTable] = {}


def _deadline(time_limit: float | None) -> Callable[[str, int], None]:
    if time_limit is None:
        return lambda stage, d: None
    stop = time.monotonic() + time_limit

    def check(stage: str, d: int) -> None:
        if time.monotonic() >= stop:
            raise Timeout(stage, d, time_limit)
    return check


def build_degree_table(d: int, time_limit: float | None = None) -> DegreeTable:
    """
    Solve the relations for the local degree on degree-(d+1) monomials.

    Squarefree monomials on a maximal chain are normalized to 1; every other
    chain-support monomial is an unknown. Solved tables are kept per d.

    Raises:
        TooLarge: outside 1 <= d <= 5
        InconsistentRelations: the system has no solution
        Underdetermined: some monomial degree is left free
        Timeout: the relations were not eliminated within `time_limit` seconds
    """
    if not 1 <= d <= MAX_TABLE_D:
        raise TooLarge("d", d, MAX_TABLE_D)
    if d in _TABLES:
        return _TABLES[d]
    expired = _deadline(time_limit)

    with logfire.span("build degree table d={d}", d=d):
        monomials = chain_monomials(d, d + 1)
        known = {m for m in monomials if len(set(m)) == d + 1}
        unknowns = [m for m in monomials if m not in known]
        logfire.debug(f"d={d}: {len(known)} maximal chains, {len(unknowns)} unknowns")

        matrix = EliminationMatrix()
        for base in chain_monomials(d, d):
            expired("degree table", d)
            for relation in _relation_rows(d, base):
                row: dict = {}
                for m, c in relation.items():
                    key = CONSTANT if m in known else m
                    row[key] = row.get(key, 0) + c
                try:
                    matrix.add(row)
                except Inconsistent as e:
                    logfire.error(f"degree relations inconsistent for d={d}: {e}")
                    raise InconsistentRelations(d) from e

        values, free = matrix.solution(unknowns)
        if free:
            raise Underdetermined(d, [monomial_label(m) for m in free])

        entries = {m: Fraction(1) for m in known}
        entries.update(values)
        logfire.info(f"degree table d={d}: {len(entries)} chain monomials, {len(matrix)} pivots")
        _TABLES[d] = DegreeTable(d, dict(sorted(entries.items())))
        return _TABLES[d]


def ldeg(e: ChowElement, t: DegreeTable) -> Fraction:
    """Linear extension of the degree table to a degree-(d+1) element."""
    if e.d != t.d:
        raise DegreeMismatch(t.d, e.d, what="dimension")
    if e.terms and e.degree != t.d + 1:
        raise DegreeMismatch(t.d + 1, e.degree)
    return sum((c * t.value(m) for m, c in e.terms.items()), Fraction(0))


def rewrite_degree(m: Sequence[BitVec], d: int, max_depth: int = 64) -> Fraction | None:
    """
    Degree of a monomial by rewriting squares, independent of the linear system.

    C_a^2 * rest -> -sum_{C' != C_a} C' * C_a * rest, non-chain monomials pruned,
    squarefree maximal chains worth 1. Returns None if the rewriting cycles or
    exceeds `max_depth`.
    """
    memo: dict[Monomial, Fraction] = {}
    active: set[Monomial] = set()
    verts = cube_vertices(d)

    def visit(mono: Monomial, depth: int) -> Fraction | None:
        if not is_chain(mono):
            return Fraction(0)
        if len(set(mono)) == d + 1:
            return Fraction(1)
        if mono in memo:
            return memo[mono]
        if mono in active or depth > max_depth:
            return None
        active.add(mono)
        result = None
        counts = Counter(mono)
        for a in sorted(v for v, k in counts.items() if k > 1):
            rest = list(mono)
            rest.remove(a)
            total = Fraction(0)
            for w in verts:
                if w == a:
                    continue
                value = visit(canonical(rest + [w]), depth + 1)
                if value is None:
                    break
                total -= value
            else:
                result = total
                break
        active.discard(mono)
        if result is not None:
            memo[mono] = result
        return result

    mono = canonical(m)
    if len(mono) != d + 1:
        raise DegreeMismatch(d + 1, len(mono))
    return visit(mono, 0)


# =============================================================================
# Fourier degrees
# =============================================================================

@dataclass(frozen=True)
class FDegreeTable:
    """ldeg(F_{v_0} ... F_{v_d}) for all tuples, indexed by vertex_index of each v_i."""

    d: int
    tensor: np.ndarray

    def value(self, vs: Sequence[BitVec]) -> Fraction:
        x = self.tensor[tuple(vertex_index(v) for v in vs)]
        return x if isinstance(x, Fraction) else Fraction(int(x))

    def nonzero_tuples(self) -> list[tuple[BitVec, ...]]:
        """Ordered tuples with nonzero degree, lexicographic."""
        verts = cube_vertices(self.d)
        hits = np.argwhere(self.tensor != 0)
        return [tuple(verts[i] for i in idx) for idx in hits]


def fourier_degrees(t: DegreeTable) -> FDegreeTable:
    """
    Walsh-Hadamard transform of the symmetric monomial degree tensor.

    Raises:
        TooLarge: for d > 4 (the tensor has 2^(d(d+1)) entries)
    """
    d = t.d
    if d > MAX_TENSOR_D:
        raise TooLarge("d", d, MAX_TENSOR_D)
    integral = all(v.denominator == 1 for v in t.entries.values())
    dtype = np.int64 if integral else object
    size = 2 ** d
    tensor = np.zeros((size,) * (d + 1), dtype=dtype)
    for m, value in t.entries.items():
        if not value:
            continue
        cell = int(value) if integral else value
        for perm in multiset_permutations([vertex_index(v) for v in m]):
            tensor[tuple(perm)] = cell

    verts = cube_vertices(d)
    hadamard = np.array([[(-1) ** (sum(a * b for a, b in zip(v, w)) % 2) for w in verts] for v in verts],
                        dtype=dtype)
    for axis in range(d + 1):
        tensor = np.moveaxis(np.tensordot(hadamard, tensor, axes=([1], [axis])), 0, axis)
    return FDegreeTable(d, tensor)


def nonzero_tuples(t: DegreeTable) -> list[tuple[BitVec, ...]]:
    """Ordered (d+1)-tuples with nonzero F-degree; the enumeration domain of the pairings."""
    return t.fourier.nonzero_tuples()


def f_degree(d: int, vs: Sequence[BitVec], t: DegreeTable) -> Fraction:
    """ldeg(prod F_{v_i}), memoized on the multiset of the v_i."""
    if t.d != d:
        raise DegreeMismatch(t.d, d, what="dimension")
    if len(vs) != d + 1:
        raise DegreeMismatch(d + 1, len(vs), what="tuple length")
    key = tuple(sorted(tuple(v) for v in vs))
    cache = t._f_cache
    if key not in cache:
        if d <= MAX_TENSOR_D:
            cache[key] = t.fourier.value(key)
        else:
            cache[key] = f_degree_by_product(key, t)
    return cache[key]


def f_degree_by_product(vs: Sequence[BitVec], t: DegreeTable) -> Fraction:
    """ldeg of the expanded product; the definitional path."""
    product = expand_F(vs[0])
    for v in vs[1:]:
        product = multiply(product, expand_F(v))
    return ldeg(product, t)


# =============================================================================
# Vanishing condition
# =============================================================================

class Violation(SkelModel):
    partition: list[list[int]]
    tuple_: list[str] = Field(alias="tuple")
    alpha_sum: int
    ldeg: Rational


class VanishingReport(SkelModel):
    """Tuples breaking the vanishing condition (expected: none)."""

    d: int
    partitions: int
    checked_multisets: int
    checked_tuples: int
    violations: list[Violation]

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def csv_header(self) -> list[str]:
        return ["partition", "tuple", "alpha_sum", "ldeg"]

    def csv_rows(self) -> list[list[str]]:
        return [[str(Partition.from_blocks(v.partition)), " ".join(v.tuple_), str(v.alpha_sum),
                 f"{v.ldeg.numerator}/{v.ldeg.denominator}"] for v in self.violations]


def _orderings(multiset: Sequence[BitVec]) -> int:
    counts = Counter(multiset)
    return math.factorial(len(multiset)) // math.prod(math.factorial(k) for k in counts.values())


def check_vanishing(d: int, t: DegreeTable, time_limit: float | None = None) -> VanishingReport:
    """
    Check ldeg(prod F_{v_i}) = 0 whenever sum_i alpha(P, v_i) < d + |P|.

    Tuples are visited as multisets; both alpha sums and degrees are invariant
    under reordering, and checked_tuples counts the ordered tuples covered.

    Raises:
        Timeout: the check did not finish within `time_limit` seconds
    """
    expired = _deadline(time_limit)
    if t.d != d:
        raise DegreeMismatch(t.d, d, what="dimension")
    with logfire.span("check vanishing condition d={d}", d=d):
        partitions = all_partitions(d)
        multisets = list(itertools.combinations_with_replacement(cube_vertices(d), d + 1))
        degrees = {}
        for m in multisets:
            expired("vanishing check", d)
            degrees[m] = f_degree(d, m, t)
        violations = []
        for p in partitions:
            expired("vanishing check", d)
            for m in multisets:
                if not degrees[m]:
                    continue
                total = sum(alpha(p, v) for v in m)
                if total < d + p.size:
                    violations.append(Violation(partition=p.to_json(), tuple_=[bits_label(v) for v in m],
                                                alpha_sum=total, ldeg=degrees[m]))
        tuples = sum(_orderings(m) for m in multisets) * len(partitions)
        report = VanishingReport(d=d, partitions=len(partitions), checked_multisets=len(multisets) * len(partitions),
                                 checked_tuples=tuples, violations=violations)
        if report.passed:
            logfire.info(f"vanishing condition holds for d={d} ({tuples} tuples)")
        else:
            logfire.warn(f"vanishing condition fails for d={d}: {len(violations)} violation(s)")
        return report


# =============================================================================
# Export
# =============================================================================

class DegreeRow(SkelModel):
    tuple_: list[str] = Field(alias="tuple")
    ldeg: Rational


class DegreeTableReport(SkelModel):
    """F-degree (or vertex-monomial degree) table for export."""

    d: int
    basis: str
    rows: list[DegreeRow]

    def csv_header(self) -> list[str]:
        return ["tuple", "ldeg"]

    def csv_rows(self) -> list[list[str]]:
        return [[" ".join(r.tuple_), f"{r.ldeg.numerator}/{r.ldeg.denominator}"] for r in self.rows]


def degree_rows(t: DegreeTable, basis: str = "fourier", nonzero_only: bool = False) -> DegreeTableReport:
    """One row per multiset of F's (basis "fourier") or per chain monomial (basis "vertex")."""
    if basis == "fourier":
        pairs = [(m, f_degree(t.d, m, t))
                 for m in itertools.combinations_with_replacement(cube_vertices(t.d), t.d + 1)]
    elif basis == "vertex":
        pairs = list(t.entries.items())
    else:
        raise ValueError(f"unknown basis {basis!r}")
    rows = [DegreeRow(tuple_=[bits_label(v) for v in m], ldeg=value)
            for m, value in pairs if value or not nonzero_only]
    return DegreeTableReport(d=t.d, basis=basis, rows=rows)
