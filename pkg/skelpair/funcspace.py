"""
Functions on |Gamma^d|: lattice grids and expression-defined functions.

GridFunction holds exact vertex values of a piecewise-affine function on the
n-fold subdivision; ExprFunction holds one expression per cube chart. Both
sample at float points, which is all the Fourier differences need. The lattice
approximation and the grid integrals stay exact.

Usage:
    from skelpair.funcspace import ExprFunction, standard_approximation, lattice_delta

    f = ExprFunction.build(g, 2, "simplices", {"*": "abs(x1-x2)"})
    grid = standard_approximation(f, 8)
    lattice_delta(grid, LatticePoint(Chart((0, 0)), (3, 3), 8), (1, 1))
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from functools import cache, cached_property
from typing import Callable, Mapping, Protocol, Sequence

import logfire
import numpy as np

from skelpair.errors import (
    DegenerateRadius,
    DegreeMismatch,
    GluingMismatch,
    LevelMismatch,
    MalformedDocument,
    OutOfRange,
)
from skelpair.expr import Node, evaluate_exact, evaluate_points, parse_expr
from skelpair.skeleton import (
    EPS_COINCIDE,
    BitVec,
    Chart,
    Graph,
    LatticePoint,
    Partition,
    cell_partition,
    charts,
    diagonal_chart,
    lattice_vertex_key,
    subdivide,
)

H_START = 1 / 16
H_MIN = 1e-5
LADDER_LEVELS = 4
CONTINUITY_SAMPLES = 16
CONTINUITY_TOL = 1e-9
DYADIC = 2 ** 53


class Smoothness(StrEnum):
    CUBES = "cubes"
    SIMPLICES = "simplices"


class ChartFunction(Protocol):
    graph: Graph
    d: int

    def sample(self, chart: Chart, points: np.ndarray) -> np.ndarray:
        """Float values at the rows of `points` inside `chart`."""
        ...


def _signs(d: int) -> np.ndarray:
    """signs[v, w] = (-1)^<v,w> over the vertices of I^d in lexicographic order."""
    verts = np.array(list(itertools.product((0, 1), repeat=d)), dtype=int)
    return np.where((verts @ verts.T) % 2 == 0, 1, -1)


def _index(v: BitVec) -> int:
    return int("".join(str(b) for b in v), 2)


def _corner_directions(d: int) -> np.ndarray:
    """(-1)^w for each vertex w, one row per w."""
    verts = np.array(list(itertools.product((0, 1), repeat=d)), dtype=int)
    return 1 - 2 * verts


# =============================================================================
# Expression functions
# =============================================================================

@dataclass(frozen=True)
class ExprFunction:
    """One expression per chart of Gamma^d, with an optional default."""

    graph: Graph
    d: int
    smooth: Smoothness
    expressions: Mapping[Chart, Node]
    default: Node | None = None
    warnings: tuple[str, ...] = ()

    @classmethod
    def build(
        cls,
        graph: Graph,
        d: int,
        smooth: str | Smoothness,
        chart_texts: Mapping[str, str],
        check_continuity: bool = True,
    ) -> ExprFunction:
        """
        Parse per-chart expressions; key "*" is the default for unlisted charts.

        Raises:
            MalformedDocument: unknown smoothness class, bad chart key, or a chart
                without expression
            ExprSyntaxError, UnknownIdentifier, ArityMismatch: from the parser
        """
        try:
            smooth = Smoothness(smooth)
        except ValueError as e:
            raise MalformedDocument("function", f"smoothness must be 'cubes' or 'simplices', got {smooth!r}") from e
        default = None
        expressions: dict[Chart, Node] = {}
        for key, text in chart_texts.items():
            node = parse_expr(str(text), d)
            if key == "*":
                default = node
            else:
                expressions[Chart.parse(key, graph, d)] = node
        if default is None:
            missing = [c.key for c in charts(graph, d) if c not in expressions]
            if missing:
                raise MalformedDocument("function", f"no expression for chart(s) {', '.join(missing)}")
        f = cls(graph, d, smooth, expressions, default)
        if check_continuity:
            warnings = continuity_warnings(f)
            for w in warnings:
                logfire.warn(w)
            f = cls(graph, d, smooth, expressions, default, tuple(warnings))
        return f

    def expression_for(self, chart: Chart) -> Node:
        node = self.expressions.get(chart, self.default)
        if node is None:
            raise MalformedDocument("function", f"no expression for chart {chart.key}")
        return node

    def sample(self, chart: Chart, points: np.ndarray) -> np.ndarray:
        if chart.d != self.d:
            raise DegreeMismatch(self.d, chart.d, what="chart dimension")
        return evaluate_points(self.expression_for(chart), points)


def evaluate(f: ExprFunction, chart: Chart, x: Sequence[float]) -> float:
    """Value of the chart's expression at x in double precision."""
    return float(f.sample(chart, np.asarray([x], dtype=float))[0])


def continuity_warnings(f: ExprFunction) -> list[str]:
    """
    Compare the expressions of charts sharing a face at sampled face points.

    Two charts share a face when they differ in one coordinate k and the two
    edges there meet in a vertex; the face is that coordinate fixed at the
    vertex's parameter on each edge.
    """
    g, d = f.graph, f.d
    rng = np.random.default_rng(0)
    face = rng.random((CONTINUITY_SAMPLES, d - 1))
    warnings = []
    for chart in charts(g, d):
        for k, edge in enumerate(chart.edge_indices):
            for b, vertex in ((0, g.edges[edge][0]), (1, g.edges[edge][1])):
                for other_edge, b_other in g.incident_edges(vertex):
                    if (other_edge, b_other) <= (edge, b):
                        continue
                    other = Chart(chart.edge_indices[:k] + (other_edge,) + chart.edge_indices[k + 1:])
                    x = np.insert(face, k, b, axis=1)
                    y = np.insert(face, k, b_other, axis=1)
                    gap = float(np.max(np.abs(f.sample(chart, x) - f.sample(other, y))))
                    if gap > CONTINUITY_TOL:
                        warnings.append(f"charts {chart.key} and {other.key} disagree by {gap:.3g} "
                                        f"on the face at vertex {g.vertices[vertex]}")
    return warnings


# =============================================================================
# Grid functions
# =============================================================================

@dataclass(frozen=True)
class GridFunction:
    """Exact values at the lattice vertices {0..n}^d of every chart."""

    graph: Graph
    d: int
    n: int
    values: Mapping[Chart, np.ndarray] = field(repr=False)

    @classmethod
    def build(cls, graph: Graph, d: int, n: int, values: Mapping[Chart, np.ndarray]) -> GridFunction:
        """
        Validate shapes and gluing of per-chart value arrays.

        Raises:
            MalformedDocument: missing chart or wrong array shape
            GluingMismatch: two charts disagree at a shared lattice vertex
        """
        shape = (n + 1,) * d
        seen: dict[tuple, Fraction] = {}
        arrays = {}
        for chart in charts(graph, d):
            if chart not in values:
                raise MalformedDocument("grid", f"no values for chart {chart.key}")
            arr = np.asarray(values[chart], dtype=object)
            if arr.shape != shape:
                raise MalformedDocument("grid", f"chart {chart.key} has shape {arr.shape}, expected {shape}")
            arr = np.vectorize(Fraction, otypes=[object])(arr)
            for index in itertools.product(range(n + 1), repeat=d):
                key = lattice_vertex_key(graph, chart, index, n)
                value = arr[index]
                if seen.setdefault(key, value) != value:
                    raise GluingMismatch(key, str(seen[key]), str(value))
            arrays[chart] = arr
        return cls(graph, d, n, arrays)

    @classmethod
    def from_vertex_function(
        cls, graph: Graph, d: int, n: int, fn: Callable[[Chart, tuple[int, ...]], Fraction]
    ) -> GridFunction:
        """Evaluate `fn` once per global lattice vertex; shared vertices reuse the first value."""
        seen: dict[tuple, Fraction] = {}
        arrays = {}
        for chart in charts(graph, d):
            arr = np.empty((n + 1,) * d, dtype=object)
            for index in itertools.product(range(n + 1), repeat=d):
                key = lattice_vertex_key(graph, chart, index, n)
                if key not in seen:
                    seen[key] = Fraction(fn(chart, index))
                arr[index] = seen[key]
            arrays[chart] = arr
        return cls(graph, d, n, arrays)

    @cached_property
    def _float_values(self) -> dict[Chart, np.ndarray]:
        return {c: arr.astype(float) for c, arr in self.values.items()}

    @cached_property
    def _delta_cache(self) -> dict[tuple[Chart, BitVec], np.ndarray]:
        return {}

    def value_at(self, chart: Chart, index: Sequence[int]) -> Fraction:
        return self.values[chart][tuple(index)]

    def sample(self, chart: Chart, points: np.ndarray) -> np.ndarray:
        """Piecewise-affine interpolation on the simplices of the containing cells."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        vals = self._float_values[chart]
        scaled = points * self.n
        cell = np.clip(np.floor(scaled).astype(int), 0, self.n - 1)
        local = scaled - cell
        order = np.argsort(-local, axis=1, kind="stable")
        s = np.take_along_axis(local, order, axis=1)
        corner = cell.copy()
        rows = np.arange(points.shape[0])
        out = (1 - s[:, 0]) * vals[tuple(corner.T)]
        for k in range(self.d):
            corner[rows, order[:, k]] += 1
            weight = s[:, k] - (s[:, k + 1] if k + 1 < self.d else 0)
            out = out + weight * vals[tuple(corner.T)]
        return out

    def exact_at(self, chart: Chart, x: Sequence[Fraction]) -> Fraction:
        """Exact interpolated value at a rational point."""
        scaled = [Fraction(c) * self.n for c in x]
        cell = [min(int(c), self.n - 1) for c in scaled]
        local = [c - i for c, i in zip(scaled, cell)]
        order = sorted(range(self.d), key=lambda i: -local[i])
        s = [local[i] for i in order] + [Fraction(0)]
        arr = self.values[chart]
        corner = list(cell)
        total = (1 - s[0]) * arr[tuple(corner)]
        for k in range(self.d):
            corner[order[k]] += 1
            total += (s[k] - s[k + 1]) * arr[tuple(corner)]
        return total

    def _combine(self, other: GridFunction, op: Callable) -> GridFunction:
        if other.n != self.n:
            raise LevelMismatch(self.n, other.n)
        if other.d != self.d:
            raise DegreeMismatch(self.d, other.d, what="dimension")
        return GridFunction(self.graph, self.d, self.n,
                            {c: op(arr, other.values[c]) for c, arr in self.values.items()})

    def __add__(self, other: GridFunction) -> GridFunction:
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other: GridFunction) -> GridFunction:
        return self._combine(other, lambda a, b: a - b)

    def scale(self, c: Fraction | int) -> GridFunction:
        c = Fraction(c)
        return GridFunction(self.graph, self.d, self.n, {ch: arr * c for ch, arr in self.values.items()})

    __rmul__ = scale

    def same_values(self, other: GridFunction) -> bool:
        return (self.n == other.n and self.d == other.d
                and all(np.array_equal(arr, other.values[c]) for c, arr in self.values.items()))


def constant_grid(graph: Graph, d: int, n: int, c: Fraction | int) -> GridFunction:
    return GridFunction.from_vertex_function(graph, d, n, lambda chart, index: Fraction(c))


def dyadic(value: float) -> Fraction:
    """Round a double to the nearest rational with denominator 2^53."""
    return Fraction(round(value * DYADIC), DYADIC)


def standard_approximation(f: ExprFunction | GridFunction, n: int) -> GridFunction:
    """
    The n-th standard approximation: the piecewise-affine interpolation of f at
    the lattice vertices i/n of every chart.

    Rational expressions are evaluated exactly; others in double precision and
    rounded to denominator 2^53. A grid of level n is returned unchanged.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if isinstance(f, GridFunction):
        if f.n == n:
            return f
        return GridFunction.from_vertex_function(
            f.graph, f.d, n, lambda chart, index: f.exact_at(chart, [Fraction(i, n) for i in index]))

    with logfire.span("standard approximation n={n}", n=n):
        lattice = list(itertools.product(range(n + 1), repeat=f.d))
        float_cache: dict[Chart, dict[tuple[int, ...], float]] = {}

        def value(chart: Chart, index: tuple[int, ...]) -> Fraction:
            node = f.expression_for(chart)
            if node.is_rational():
                exact = evaluate_exact(node, [Fraction(i, n) for i in index])
                if exact is not None:
                    return exact
            if chart not in float_cache:
                pts = np.array(lattice, dtype=float) / n
                float_cache[chart] = dict(zip(lattice, evaluate_points(node, pts).tolist()))
            return dyadic(float_cache[chart][index])

        return GridFunction.from_vertex_function(f.graph, f.d, n, value)


def refine(grid: GridFunction, k: int) -> GridFunction:
    """The same piecewise-affine function at level n*k."""
    return standard_approximation(grid, grid.n * k)


def rebase(grid: GridFunction, k: int) -> GridFunction:
    """
    View a grid of level n on Gamma as a grid of level n/k on sd_k(Gamma).

    Raises:
        LevelMismatch: if k does not divide the level
    """
    if grid.n % k:
        raise LevelMismatch(grid.n - grid.n % k, grid.n)
    sub, smap = subdivide(grid.graph, k)
    m = grid.n // k
    arrays = {}
    for chart in charts(sub, grid.d):
        origins = [smap.edge_origin[e] for e in chart.edge_indices]
        parent = Chart(tuple(p for p, _ in origins))
        window = tuple(slice(j * m, j * m + m + 1) for _, j in origins)
        arrays[chart] = grid.values[parent][window]
    return GridFunction(sub, grid.d, m, arrays)


# =============================================================================
# Differences
# =============================================================================

def difference_field(
    f: ChartFunction, chart: Chart, points: np.ndarray, v: BitVec, h: np.ndarray | float
) -> np.ndarray:
    """Delta_h^v f at each row of `points`; h is a scalar or one step per row."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    d = points.shape[1]
    h = np.broadcast_to(np.asarray(h, dtype=float), (points.shape[0],))
    directions = _corner_directions(d)
    corners = points[None, :, :] + directions[:, None, :] * h[None, :, None]
    values = f.sample(chart, corners.reshape(-1, d)).reshape(len(directions), -1)
    signs = _signs(d)[_index(v)]
    return (signs[:, None] * values).sum(axis=0) / 2 ** d


def fourier_delta(f: ChartFunction, chart: Chart, x: Sequence[float], v: BitVec, h: float) -> float:
    """
    (1/2^d) sum_w (-1)^<v,w> f(x + h^w) with h^w = h((-1)^w_1, ..., (-1)^w_d).

    Raises:
        OutOfRange: if the cube of radius h around x leaves the open chart
    """
    if any(not (0 < float(c) - h and float(c) + h < 1) for c in x):
        raise OutOfRange([float(c) for c in x], h)
    return float(difference_field(f, chart, np.asarray([x], dtype=float), v, h)[0])


def lattice_delta_field(grid: GridFunction, chart: Chart, v: BitVec) -> np.ndarray:
    """Exact lattice approximation on every cell of a chart, shape (n,)*d; memoized per grid."""
    key = (chart, tuple(v))
    if key in grid._delta_cache:
        return grid._delta_cache[key]
    n, d = grid.n, grid.d
    arr = grid.values[chart]
    signs = _signs(d)[_index(v)]
    total = None
    for w, sign in zip(itertools.product((0, 1), repeat=d), signs):
        window = arr[tuple(slice(1 - b, n + 1 - b) for b in w)]
        term = window if sign > 0 else -window
        total = term if total is None else total + term
    assert total is not None
    total = total * Fraction(1, 2 ** d)
    grid._delta_cache[key] = total
    return total


def lattice_delta(f: GridFunction | ExprFunction, p: LatticePoint, v: BitVec) -> Fraction | float:
    """
    Delta_{1/2n}^v f at the centre of the cell p; corners land on lattice vertices.

    Raises:
        LevelMismatch: grid level differs from p.level
    """
    if isinstance(f, GridFunction):
        if p.level != f.n:
            raise LevelMismatch(f.n, p.level)
        arr = f.values[p.chart]
        signs = _signs(f.d)[_index(v)]
        total = Fraction(0)
        for w, sign in zip(itertools.product((0, 1), repeat=f.d), signs):
            corner = tuple(c + 1 - b for c, b in zip(p.cell, w))
            total += int(sign) * arr[corner]
        return total / 2 ** f.d
    center = np.array([float(c) for c in p.center])
    return float(difference_field(f, p.chart, center[None, :], v, 1 / (2 * p.level))[0])


# =============================================================================
# Generalized differentials
# =============================================================================

def _coincidence_mask(points: np.ndarray) -> np.ndarray:
    """True for points with two coinciding coordinates."""
    d = points.shape[1]
    mask = np.zeros(points.shape[0], dtype=bool)
    for i, j in itertools.combinations(range(d), 2):
        mask |= np.abs(points[:, i] - points[:, j]) <= EPS_COINCIDE
    return mask


def safe_radius(points: np.ndarray, smooth: Smoothness) -> np.ndarray:
    """
    Largest admissible starting step per point.

    Half the distance to the boundary; for simplex-smooth functions also a
    quarter of the smallest gap between distinct coordinates.
    """
    radius = np.minimum(H_START, 0.5 * np.minimum(points, 1 - points).min(axis=1))
    if smooth == Smoothness.SIMPLICES:
        d = points.shape[1]
        for i, j in itertools.combinations(range(d), 2):
            gap = np.abs(points[:, i] - points[:, j])
            gap = np.where(gap <= EPS_COINCIDE, np.inf, gap)
            radius = np.minimum(radius, 0.25 * gap)
    return radius


def differential_field(
    f: ExprFunction,
    chart: Chart,
    points: np.ndarray,
    v: BitVec,
    a: int,
    levels: int = LADDER_LEVELS,
    h_min: float = H_MIN,
) -> tuple[np.ndarray, np.ndarray]:
    """
    D^v_a f = lim h^-a Delta_h^v f at each row of `points`, with error estimates.

    Steps h_k = h0/2^k, k = 0..levels, combined in a Richardson tableau. The
    elimination exponents are 2, 4, ... where f is smooth around the point and
    1, 2, 3, ... on a diagonal of a simplex-smooth function. Each point keeps
    the tableau entry with the smallest error estimate.

    Raises:
        DegenerateRadius: if the admissible step at some point is below h_min
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    count = points.shape[0]
    if f.smooth == Smoothness.CUBES and a < sum(v):
        return np.zeros(count), np.zeros(count)

    h0 = safe_radius(points, f.smooth)
    if np.any(bad := h0 < h_min):
        first = int(np.argmax(bad))
        raise DegenerateRadius(points[first].tolist(), float(h0[first]), h_min)

    on_diagonal = _coincidence_mask(points) if f.smooth == Smoothness.SIMPLICES else np.zeros(count, dtype=bool)

    column = []
    for k in range(levels + 1):
        h = h0 / 2 ** k
        column.append(difference_field(f, chart, points, v, h) / h ** a)

    best = column[-1]
    err = np.abs(column[-1] - column[-2]) if levels else np.full(count, np.inf)
    previous = column
    for j in range(1, levels + 1):
        factor = np.where(on_diagonal, 2.0 ** j, 4.0 ** j)
        current = []
        for k in range(levels + 1 - j):
            value = (factor * previous[k + 1] - previous[k]) / (factor - 1)
            estimate = np.maximum(np.abs(value - previous[k + 1]), np.abs(value - previous[k]))
            better = estimate < err
            best = np.where(better, value, best)
            err = np.where(better, estimate, err)
            current.append(value)
        previous = current
    return best, err


def generalized_differential(
    f: ExprFunction, chart: Chart, x: Sequence[float], v: BitVec, a: int
) -> tuple[float, float]:
    """D^v_a f(x) and its residual estimate at a single inner point."""
    value, residual = differential_field(f, chart, np.asarray([x], dtype=float), v, a)
    return float(value[0]), float(residual[0])


def zhang_delta(f: ExprFunction, chart: Chart, x: Sequence[float]) -> float:
    """delta(f)(x) = 2 D^{(1,1)}_1 f(x) at a diagonal point of a surface chart."""
    if f.d != 2:
        raise DegreeMismatch(2, f.d, what="dimension")
    if abs(float(x[0]) - float(x[1])) > EPS_COINCIDE:
        raise ValueError(f"{list(x)} is not on the diagonal")
    value, _ = generalized_differential(f, chart, x, (1, 1), 1)
    return 2 * value


# =============================================================================
# Integrals
# =============================================================================

def integrate_grid_product(factors: Sequence[tuple[GridFunction, BitVec]], n: int) -> Fraction:
    """
    Exact integral over Gamma^d of a product of lattice approximations.

    Each factor is constant on the 1/n-cells, so this is a cell sum times n^-d.

    Raises:
        LevelMismatch: a grid has a different level
    """
    return sum(integrate_grid_product_split(factors, n).values(), Fraction(0))


def integrate_grid_product_split(
    factors: Sequence[tuple[GridFunction, BitVec]], n: int
) -> dict[Partition, Fraction]:
    """integrate_grid_product restricted to the cells whose centre has partition P, per P."""
    first = factors[0][0]
    for grid, _ in factors:
        if grid.n != n:
            raise LevelMismatch(n, grid.n)
        if grid.d != first.d:
            raise DegreeMismatch(first.d, grid.d, what="dimension")
    masks = cell_partition_masks(first.d, n)
    totals = {p: Fraction(0) for p in masks}
    for chart in charts(first.graph, first.d):
        product = None
        for grid, v in factors:
            field_ = lattice_delta_field(grid, chart, v)
            product = field_ if product is None else product * field_
        for p, mask in masks.items():
            totals[p] += Fraction(np.sum(product[mask]))
    return {p: total / n ** first.d for p, total in totals.items()}


@cache
def cell_partition_masks(d: int, n: int) -> dict[Partition, np.ndarray]:
    """Boolean masks over the cells {0..n-1}^d grouped by the partition of the cell centre."""
    labels: dict[Partition, np.ndarray] = {}
    for cell in itertools.product(range(n), repeat=d):
        p = cell_partition(cell)
        if p not in labels:
            labels[p] = np.zeros((n,) * d, dtype=bool)
        labels[p][cell] = True
    return dict(sorted(labels.items(), key=lambda item: item[0].sort_key()))


def pixelated_integral(cells: np.ndarray, n: int, p: Partition) -> Fraction:
    """Integral over the cube of a cell-constant function times 1{d(x~) = P}."""
    d = cells.ndim
    mask = cell_partition_masks(d, n).get(p)
    if mask is None:
        return Fraction(0)
    return Fraction(np.sum(cells[mask])) / n ** d if mask.any() else Fraction(0)


def diagonal_cell_integral(cells: np.ndarray, n: int, p: Partition) -> Fraction:
    """
    Integral over D_P of a cell-constant function times 1{d(x~) = P}.

    A diagonal point embed(t) lies in the cell embed(floor(n t)), whose centre has
    partition P exactly when the block indices are pairwise distinct.
    """
    chart = diagonal_chart(p)
    total = Fraction(0)
    for block_cells in itertools.permutations(range(n), p.size):
        total += Fraction(cells[chart.embed(block_cells)])
    return total / n ** p.size


def quadrature_nodes(size: int, m: int) -> np.ndarray:
    """
    Midpoint nodes on [0,1]^size, m * 2^j points on axis j.

    Different dyadic refinements per axis keep every node off the
    coordinate diagonals.
    """
    axes = [(np.arange(m * 2 ** j) + 0.5) / (m * 2 ** j) for j in range(size)]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def integrate_diagonal(
    graph: Graph,
    d: int,
    p: Partition,
    integrand: Callable[[Chart, np.ndarray], np.ndarray],
    m: int,
) -> float:
    """
    Midpoint-rule integral over D_P, summed over the charts of Gamma^d.

    `integrand(chart, points)` receives inner points of the diagonal stacked
    along axis 0 and returns one value per point.
    """
    if m < 1:
        raise ValueError("m must be positive")
    nodes = diagonal_chart(p).embed_array(quadrature_nodes(p.size, m))
    return float(sum(np.mean(integrand(chart, nodes)) for chart in charts(graph, d)))
