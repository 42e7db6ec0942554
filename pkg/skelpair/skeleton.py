"""
Graphs, their powers and the combinatorics of the cube charts.

A Graph is a finite ordered graph without multiple simplices. Its d-fold power is
covered by cube charts, one per d-tuple of edges; inside a chart a point is a
vector in [0,1]^d, and coordinate t on edge (a, b) is the mass at the head b.

Usage:
    from skelpair.skeleton import validate_graph, charts, point_partition

    g = validate_graph(["a", "b", "c"], [("a", "b"), ("b", "c")])
    charts(g, 2)                     # 4 charts, lexicographic
    point_partition((0.3, 0.3, 0.7))  # {{1,2},{3}}
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from sympy.utilities.iterables import multiset_partitions

from skelpair.errors import (
    DuplicateVertex,
    MalformedDocument,
    NotInner,
    ParallelEdge,
    SelfLoop,
    TooLarge,
    UnknownVertex,
)
from skelpair.models import SkelModel

EPS_COINCIDE = 1e-12
"""Absolute tolerance for coordinate coincidence of floating-point points."""

MAX_PARTITION_D = 8

type Real = float | Fraction
type BitVec = tuple[int, ...]


# =============================================================================
# Graphs
# =============================================================================

class Graph(SkelModel):
    """Finite ordered graph; edges are (tail, head) vertex indices with tail < head."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]
    name: str = "graph"

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def edge_label(self, index: int) -> str:
        tail, head = self.edges[index]
        return f"{self.vertices[tail]}-{self.vertices[head]}"

    def incident_edges(self, vertex: int) -> list[tuple[int, int]]:
        """Edges at `vertex` as (edge index, parameter of the vertex on that edge)."""
        out = []
        for i, (tail, head) in enumerate(self.edges):
            if tail == vertex:
                out.append((i, 0))
            elif head == vertex:
                out.append((i, 1))
        return out


def validate_graph(
    raw_vertices: Sequence[str],
    raw_edges: Sequence[Sequence[str]],
    name: str = "graph",
) -> Graph:
    """
    Build a canonical Graph from vertex names and edges given by vertex names.

    Edges are reoriented so that tail < head in the vertex order.

    Raises:
        SelfLoop, ParallelEdge, UnknownVertex, DuplicateVertex, MalformedDocument
    """
    if not raw_vertices or not raw_edges:
        raise MalformedDocument(name, "a graph needs at least one vertex and one edge")

    index: dict[str, int] = {}
    for v in raw_vertices:
        v = str(v)
        if v in index:
            raise DuplicateVertex(v)
        index[v] = len(index)

    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for edge in raw_edges:
        if len(edge) != 2:
            raise MalformedDocument(name, f"edge {list(edge)!r} is not a vertex pair")
        a, b = (str(x) for x in edge)
        for v in (a, b):
            if v not in index:
                raise UnknownVertex(v)
        if a == b:
            raise SelfLoop(a)
        pair = (min(index[a], index[b]), max(index[a], index[b]))
        if pair in seen:
            tail, head = pair
            raise ParallelEdge(str(raw_vertices[tail]), str(raw_vertices[head]))
        seen.add(pair)
        edges.append(pair)

    return Graph(vertices=tuple(str(v) for v in raw_vertices), edges=tuple(edges), name=name)


def standard_interval() -> Graph:
    """The standard graph I: two vertices, one edge."""
    return validate_graph(["0", "1"], [("0", "1")], name="I")


# =============================================================================
# Charts
# =============================================================================

@dataclass(frozen=True, order=True)
class Chart:
    """Cube chart i_gamma: [0,1]^d -> |Gamma^d| for a d-tuple of edge indices."""

    edge_indices: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.edge_indices)

    @property
    def key(self) -> str:
        """JSON key form, edge ids joined by ','."""
        return ",".join(str(e) for e in self.edge_indices)

    @classmethod
    def parse(cls, key: str, g: Graph, d: int) -> Chart:
        try:
            edges = tuple(int(part) for part in key.split(","))
        except ValueError as e:
            raise MalformedDocument(key, "chart key must be edge indices joined by ','") from e
        if len(edges) != d or any(not 0 <= e < g.edge_count for e in edges):
            raise MalformedDocument(key, f"not a chart of {g.name} in dimension {d}")
        return cls(edges)


def charts(g: Graph, d: int) -> list[Chart]:
    """All |edges|^d charts in lexicographic order."""
    if d < 1:
        raise ValueError("d must be positive")
    return [Chart(t) for t in itertools.product(range(g.edge_count), repeat=d)]


def lattice_vertex_key(g: Graph, chart: Chart, index: Sequence[int], n: int) -> tuple:
    """
    Global identity of the lattice vertex `index` in {0..n}^d of `chart`.

    Per coordinate: ("v", vertex) at parameters 0 and 1, else ("e", edge, i).
    Charts that share a face produce equal keys on it.
    """
    key = []
    for edge, i in zip(chart.edge_indices, index):
        tail, head = g.edges[edge]
        if i == 0:
            key.append(("v", tail))
        elif i == n:
            key.append(("v", head))
        else:
            key.append(("e", edge, i))
    return tuple(key)


# =============================================================================
# Simplices and partitions
# =============================================================================

def simplex_membership(x: Sequence[Real], sigma: Sequence[int]) -> bool:
    """True iff x_{sigma(1)} <= ... <= x_{sigma(d)}; sigma is 1-based."""
    ordered = [x[s - 1] for s in sigma]
    return all(a <= b for a, b in itertools.pairwise(ordered))


@dataclass(frozen=True)
class Partition:
    """Set partition of {1..d}; blocks sorted by least element."""

    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]]) -> Partition:
        canonical = sorted(tuple(sorted(b)) for b in blocks if b)
        return cls(tuple(canonical))

    @classmethod
    def discrete(cls, d: int) -> Partition:
        return cls(tuple((i,) for i in range(1, d + 1)))

    @classmethod
    def coarsest(cls, d: int) -> Partition:
        return cls((tuple(range(1, d + 1)),))

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def d(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def is_discrete(self) -> bool:
        return self.size == self.d

    @cached_property
    def block_of(self) -> tuple[int, ...]:
        """0-based block index of each coordinate 1..d."""
        owner = [0] * self.d
        for j, block in enumerate(self.blocks):
            for a in block:
                owner[a - 1] = j
        return tuple(owner)

    def sort_key(self) -> tuple:
        return (-self.size, self.blocks)

    def to_json(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]

    def __str__(self) -> str:
        inner = ",".join("{" + ",".join(str(a) for a in b) + "}" for b in self.blocks)
        return "{" + inner + "}"


def _coincide(a: Real, b: Real) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        return abs(float(a) - float(b)) <= EPS_COINCIDE
    return a == b


def point_partition(x: Sequence[Real]) -> Partition:
    """
    Partition of coordinate indices by equal value.

    Rationals compare exactly, floats within EPS_COINCIDE.

    Raises:
        NotInner: if a coordinate is outside (0, 1)
    """
    if any(not 0 < c < 1 for c in x):
        raise NotInner([str(c) for c in x])
    blocks: list[list[int]] = []
    reps: list[Real] = []
    for i, c in enumerate(x, start=1):
        for block, rep in zip(blocks, reps):
            if _coincide(c, rep):
                block.append(i)
                break
        else:
            blocks.append([i])
            reps.append(c)
    return Partition.from_blocks(blocks)


def cell_partition(cell: Sequence[int]) -> Partition:
    """Partition of a lattice cell center: coordinates with equal cell index coincide."""
    groups: dict[int, list[int]] = {}
    for i, c in enumerate(cell, start=1):
        groups.setdefault(c, []).append(i)
    return Partition.from_blocks(list(groups.values()))


def all_partitions(d: int) -> list[Partition]:
    """
    All set partitions of {1..d} in canonical order (Bell(d) of them).

    Raises:
        TooLarge: for d > 8
    """
    if d < 1:
        raise ValueError("d must be positive")
    if d > MAX_PARTITION_D:
        raise TooLarge("d", d, MAX_PARTITION_D)
    parts = [Partition.from_blocks(p) for p in multiset_partitions(list(range(1, d + 1)))]
    return sorted(parts, key=Partition.sort_key)


def alpha(p: Partition, v: BitVec) -> int:
    """Number of blocks of p that contain an index a with v_a = 1."""
    if len(v) != p.d:
        raise ValueError(f"bit vector of length {len(v)} for a partition of {p.d}")
    return sum(1 for block in p.blocks if any(v[a - 1] for a in block))


# =============================================================================
# Diagonal charts
# =============================================================================

@dataclass(frozen=True)
class DiagonalChart:
    """The chart [0,1]^{|P|} -> D_P placing t_j on every coordinate of block j."""

    partition: Partition

    def embed(self, t: Sequence[Real]) -> tuple[Real, ...]:
        if len(t) != self.partition.size:
            raise ValueError(f"expected {self.partition.size} coordinates, got {len(t)}")
        return tuple(t[j] for j in self.partition.block_of)

    def project(self, x: Sequence[Real]) -> tuple[Real, ...]:
        return tuple(x[block[0] - 1] for block in self.partition.blocks)

    def embed_array(self, t: np.ndarray) -> np.ndarray:
        """Vectorized embed for points stacked along axis 0."""
        return t[:, list(self.partition.block_of)]

    def project_array(self, x: np.ndarray) -> np.ndarray:
        return x[:, [block[0] - 1 for block in self.partition.blocks]]


def diagonal_chart(p: Partition) -> DiagonalChart:
    return DiagonalChart(p)


# =============================================================================
# Lattice points
# =============================================================================

@dataclass(frozen=True)
class LatticePoint:
    """A 1/n-cell of a chart, identified by its lower corner index."""

    chart: Chart
    cell: tuple[int, ...]
    level: int

    def __post_init__(self):
        if len(self.cell) != self.chart.d:
            raise ValueError("cell and chart dimensions differ")
        if any(not 0 <= c < self.level for c in self.cell):
            raise ValueError(f"cell {self.cell} outside level {self.level}")

    @property
    def center(self) -> tuple[Fraction, ...]:
        """x~ = (cell + 1/2) / n."""
        return tuple(Fraction(2 * c + 1, 2 * self.level) for c in self.cell)

    @classmethod
    def containing(cls, chart: Chart, x: Sequence[Real], n: int) -> LatticePoint:
        """Cell of level n containing the inner point x (the cell floor(n x))."""
        cell = tuple(min(math.floor(c * n), n - 1) for c in x)
        return cls(chart, cell, n)


# =============================================================================
# Subdivision
# =============================================================================

@dataclass(frozen=True)
class GraphPoint:
    """A point of |Gamma|: a vertex, or parameter t in (0,1) on an edge."""

    vertex: int | None = None
    edge: int | None = None
    t: Fraction = Fraction(0)


@dataclass(frozen=True)
class SubdivisionMap:
    """
    Coordinates of sd_n(Gamma) in terms of Gamma.

    `vertex_points[i]` is the image of vertex i of the subdivision; `edge_origin[k]`
    is (parent edge, j): new edge k covers [j/n, (j+1)/n] of the parent edge.
    """

    n: int
    vertex_points: tuple[GraphPoint, ...]
    edge_origin: tuple[tuple[int, int], ...]

    def vertex_point(self, vertex: int) -> GraphPoint:
        return self.vertex_points[vertex]

    def edge_point(self, edge: int, s: Fraction) -> GraphPoint:
        """Image of the interior parameter s on a subdivision edge."""
        if not 0 < s < 1:
            raise ValueError("edge_point expects an interior parameter")
        parent, j = self.edge_origin[edge]
        return GraphPoint(edge=parent, t=(j + s) / self.n)

    def then(self, inner: SubdivisionMap) -> SubdivisionMap:
        """Compose with a subdivision of the subdivided graph."""
        points = []
        for p in inner.vertex_points:
            if p.vertex is not None:
                points.append(self.vertex_point(p.vertex))
            else:
                assert p.edge is not None
                points.append(self.edge_point(p.edge, p.t))
        origin = []
        for parent, j in inner.edge_origin:
            grand, k = self.edge_origin[parent]
            origin.append((grand, k * inner.n + j))
        return SubdivisionMap(self.n * inner.n, tuple(points), tuple(origin))


def subdivide(g: Graph, n: int) -> tuple[Graph, SubdivisionMap]:
    """
    The n-fold subdivision sd_n(g) and its coordinate map.

    Interior vertex i of edge (a, b) is named "a~b#i" and sits at parameter i/n.
    Interior vertices of an edge follow its tail in the vertex order, which keeps
    every new edge oriented tail < head.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        points = tuple(GraphPoint(vertex=i) for i in range(g.vertex_count))
        return g, SubdivisionMap(1, points, tuple((e, 0) for e in range(g.edge_count)))

    interior: dict[int, list[int]] = {v: [] for v in range(g.vertex_count)}
    for e, (tail, _head) in enumerate(g.edges):
        interior[tail].append(e)

    names: list[str] = []
    points: list[GraphPoint] = []
    new_index: dict[tuple, int] = {}
    for v in range(g.vertex_count):
        new_index[("v", v)] = len(names)
        names.append(g.vertices[v])
        points.append(GraphPoint(vertex=v))
        for e in interior[v]:
            tail, head = g.edges[e]
            for i in range(1, n):
                new_index[("e", e, i)] = len(names)
                names.append(f"{g.vertices[tail]}~{g.vertices[head]}#{i}")
                points.append(GraphPoint(edge=e, t=Fraction(i, n)))

    edges: list[tuple[int, int]] = []
    origin: list[tuple[int, int]] = []
    for e, (tail, head) in enumerate(g.edges):
        path = [("v", tail)] + [("e", e, i) for i in range(1, n)] + [("v", head)]
        for j, (a, b) in enumerate(itertools.pairwise(path)):
            edges.append((new_index[a], new_index[b]))
            origin.append((e, j))

    sub = Graph(vertices=tuple(names), edges=tuple(edges), name=f"sd{n}({g.name})")
    return sub, SubdivisionMap(n, tuple(points), tuple(origin))
