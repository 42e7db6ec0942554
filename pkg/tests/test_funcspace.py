import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from skelpair.errors import (
    DegenerateRadius,
    EvalError,
    GluingMismatch,
    LevelMismatch,
    MalformedDocument,
    OutOfRange,
)
from skelpair.funcspace import (
    ExprFunction,
    GridFunction,
    Smoothness,
    cell_partition_masks,
    constant_grid,
    continuity_warnings,
    diagonal_cell_integral,
    differential_field,
    dyadic,
    evaluate,
    fourier_delta,
    generalized_differential,
    integrate_diagonal,
    integrate_grid_product,
    lattice_delta,
    pixelated_integral,
    rebase,
    refine,
    standard_approximation,
    zhang_delta,
)
from skelpair.skeleton import Chart, LatticePoint, Partition, all_partitions, charts, subdivide

I1 = Chart((0,))
I2 = Chart((0, 0))


def expr(graph, d, text, smooth="cubes"):
    return ExprFunction.build(graph, d, smooth, {"*": text})


def random_grid(graph, d, n, rng):
    return GridFunction.from_vertex_function(
        graph, d, n, lambda chart, index: Fraction(rng.randint(-9, 9), rng.randint(1, 4)))


# =============================================================================
# Expression functions
# =============================================================================

def test_evaluate(interval):
    assert evaluate(expr(interval, 2, "x1*x2"), I2, (0.5, 0.5)) == 0.25
    assert evaluate(expr(interval, 2, "abs(x1-x2)", "simplices"), I2, (0.3, 0.8)) == pytest.approx(0.5)
    with pytest.raises(EvalError):
        evaluate(expr(interval, 1, "1/x1"), I1, (0.0,))


def test_per_chart_expressions(path_graph):
    f = ExprFunction.build(path_graph, 1, "cubes", {"0": "x1", "1": "1 + x1"})
    assert f.warnings == ()
    assert evaluate(f, Chart((1,)), (0.25,)) == 1.25


def test_missing_chart_without_default(path_graph):
    with pytest.raises(MalformedDocument):
        ExprFunction.build(path_graph, 1, "cubes", {"0": "x1"})


def test_unknown_smoothness(interval):
    with pytest.raises(MalformedDocument):
        ExprFunction.build(interval, 1, "smooth", {"*": "x1"})


def test_continuity_warning(path_graph):
    f = ExprFunction.build(path_graph, 1, "cubes", {"0": "x1", "1": "x1"})
    assert len(f.warnings) == 1
    assert "disagree" in f.warnings[0]
    assert continuity_warnings(f) == list(f.warnings)


def test_continuity_on_surface(path_graph):
    # the product of a tent that is t on edge 0 and 1 - t on edge 1
    glued = ExprFunction.build(path_graph, 2, "cubes", {
        "0,0": "x1*x2", "0,1": "x1*(1-x2)", "1,0": "(1-x1)*x2", "1,1": "(1-x1)*(1-x2)",
    })
    assert glued.warnings == ()
    broken = ExprFunction.build(path_graph, 2, "cubes", {"*": "x1*x2"})
    assert broken.warnings


# =============================================================================
# Grid functions and standard approximation
# =============================================================================

def test_standard_approximation_affine_is_exact(interval):
    grid = standard_approximation(expr(interval, 1, "x1"), 3)
    assert list(grid.values[I1]) == [Fraction(i, 3) for i in range(4)]


def test_standard_approximation_square(interval):
    grid = standard_approximation(expr(interval, 1, "x1^2"), 2)
    assert list(grid.values[I1]) == [0, Fraction(1, 4), 1]


def test_standard_approximation_constant(path_graph):
    grid = standard_approximation(expr(path_graph, 2, "3/7"), 2)
    assert all(v == Fraction(3, 7) for arr in grid.values.values() for v in arr.flat)
    assert grid.same_values(constant_grid(path_graph, 2, 2, Fraction(3, 7)))


def test_standard_approximation_dyadic(interval):
    grid = standard_approximation(expr(interval, 1, "sin(pi*x1)"), 2)
    values = list(grid.values[I1])
    assert values[:2] == [0, 1]
    assert values[2] == dyadic(math.sin(math.pi))
    assert all((2 ** 53) % v.denominator == 0 for v in values)


def test_standard_approximation_is_projection(interval):
    grid = standard_approximation(expr(interval, 2, "x1*x2"), 4)
    assert standard_approximation(grid, 4) is grid


def test_shared_vertices_evaluated_once(path_graph):
    # chart expressions disagree at the shared vertex; the first chart visited wins everywhere
    f = ExprFunction.build(path_graph, 1, "cubes", {"0": "x1", "1": "x1"}, check_continuity=False)
    grid = standard_approximation(f, 2)
    assert grid.values[Chart((0,))][2] == grid.values[Chart((1,))][0] == 1


def test_grid_build_checks_gluing(path_graph):
    values = {Chart((0,)): [0, 1, 2], Chart((1,)): [3, 4, 5]}
    with pytest.raises(GluingMismatch):
        GridFunction.build(path_graph, 1, 2, values)
    values[Chart((1,))] = [2, 4, 5]
    grid = GridFunction.build(path_graph, 1, 2, values)
    assert grid.value_at(Chart((1,)), (1,)) == 4


def test_grid_build_checks_shape(path_graph):
    with pytest.raises(MalformedDocument):
        GridFunction.build(path_graph, 1, 2, {Chart((0,)): [0, 1, 2], Chart((1,)): [2, 4]})
    with pytest.raises(MalformedDocument):
        GridFunction.build(path_graph, 1, 2, {Chart((0,)): [0, 1, 2]})


def test_grid_interpolation(interval):
    grid = standard_approximation(expr(interval, 2, "x1*x2"), 1)
    # on the simplices of a single cell x1*x2 interpolates to min(x1, x2)
    assert grid.exact_at(I2, (Fraction(1, 2), Fraction(1, 4))) == Fraction(1, 4)
    points = np.array([[0.5, 0.25], [0.2, 0.9], [1.0, 1.0]])
    np.testing.assert_allclose(grid.sample(I2, points), [0.25, 0.2, 1.0])


def test_grid_linear_operations(interval):
    rng = random.Random(3)
    a, b = random_grid(interval, 2, 2, rng), random_grid(interval, 2, 2, rng)
    combined = a.scale(2) - b + b
    assert combined.same_values(a + a)
    with pytest.raises(LevelMismatch):
        a + random_grid(interval, 2, 3, rng)


def test_refine_preserves_function(interval):
    rng = random.Random(11)
    grid = random_grid(interval, 2, 2, rng)
    fine = refine(grid, 3)
    assert fine.n == 6
    for _ in range(25):
        x = (Fraction(rng.randint(0, 60), 60), Fraction(rng.randint(0, 60), 60))
        assert fine.exact_at(I2, x) == grid.exact_at(I2, x)


# =============================================================================
# Differences
# =============================================================================

def test_fourier_delta_examples(interval):
    const = expr(interval, 2, "5")
    assert fourier_delta(const, I2, (0.4, 0.6), (1, 0), 0.1) == 0
    assert fourier_delta(expr(interval, 1, "x1"), I1, (0.5,), (1,), 0.125) == pytest.approx(0.125)
    assert fourier_delta(expr(interval, 2, "x1*x2"), I2, (0.3, 0.6), (1, 1), 0.125) == pytest.approx(0.125 ** 2)


def test_fourier_delta_out_of_range(interval):
    with pytest.raises(OutOfRange):
        fourier_delta(expr(interval, 2, "x1"), I2, (0.05, 0.5), (1, 0), 0.1)


def test_fourier_inversion(interval):
    f = expr(interval, 2, "sin(x1)*exp(x2) + x1^3 - x1*x2")
    x, h = (0.4, 0.55), 1 / 8
    deltas = {v: fourier_delta(f, I2, x, v, h) for v in itertools.product((0, 1), repeat=2)}
    for w in itertools.product((0, 1), repeat=2):
        total = sum((-1) ** (v[0] * w[0] + v[1] * w[1]) * value for v, value in deltas.items())
        corner = tuple(c + h * (-1) ** b for c, b in zip(x, w))
        assert total == pytest.approx(evaluate(f, I2, corner), abs=1e-12)


def test_fourier_delta_on_grids(interval):
    grid = standard_approximation(expr(interval, 2, "x1*x2"), 1)
    # min(x1, x2) away from the diagonal is the smaller coordinate: a zero mixed difference
    assert fourier_delta(grid, I2, (0.3, 0.7), (1, 1), 0.1) == pytest.approx(0)


def test_convergence_order(interval):
    f = expr(interval, 2, "x1^2*x2^3")
    x = (0.3, 0.6)
    exact = 6 * x[0] * x[1] ** 2
    errors = [abs(fourier_delta(f, I2, x, (1, 1), h) / h ** 2 - exact) for h in (1 / 32, 1 / 64, 1 / 128)]
    assert errors[0] / errors[1] >= 3
    assert errors[1] / errors[2] >= 3


def test_lattice_delta_of_linear_grid(interval):
    for n in (1, 3, 8):
        grid = standard_approximation(expr(interval, 1, "x1"), n)
        for cell in range(n):
            p = LatticePoint(I1, (cell,), n)
            assert lattice_delta(grid, p, (1,)) == Fraction(1, 2 * n)


def test_lattice_delta_zero_vector_is_corner_average(interval):
    rng = random.Random(5)
    grid = random_grid(interval, 2, 3, rng)
    p = LatticePoint(I2, (1, 2), 3)
    corners = [grid.value_at(I2, (1 + a, 2 + b)) for a in (0, 1) for b in (0, 1)]
    assert lattice_delta(grid, p, (0, 0)) == sum(corners) / 4


def test_lattice_delta_only_sees_vertex_values(interval):
    f = expr(interval, 2, "x1^2*x2 + abs(x1 - x2)", "simplices")
    grid = standard_approximation(f, 5)
    for cell in [(0, 0), (1, 3), (4, 2)]:
        p = LatticePoint(I2, cell, 5)
        for v in itertools.product((0, 1), repeat=2):
            assert float(lattice_delta(grid, p, v)) == pytest.approx(lattice_delta(f, p, v), abs=1e-14)


def test_lattice_delta_level_mismatch(interval):
    grid = standard_approximation(expr(interval, 1, "x1"), 2)
    with pytest.raises(LevelMismatch):
        lattice_delta(grid, LatticePoint(I1, (0,), 3), (1,))


def test_lattice_vs_analytic_mixed_partial(interval):
    n = 64
    grid = standard_approximation(expr(interval, 2, "sin(pi*x1)*x2^2"), n)
    p = LatticePoint(I2, (19, 44), n)
    x1, x2 = (float(c) for c in p.center)
    approx = (2 * n) ** 2 * float(lattice_delta(grid, p, (1, 1)))
    assert approx == pytest.approx(2 * math.pi * math.cos(math.pi * x1) * x2, abs=1e-3)


# =============================================================================
# Generalized differentials
# =============================================================================

def test_mixed_partial_off_diagonal(interval):
    value, residual = generalized_differential(expr(interval, 2, "x1*x2"), I2, (0.3, 0.6), (1, 1), 2)
    assert value == pytest.approx(1.0, abs=1e-9)
    assert residual < 1e-9


def test_abs_on_diagonal(interval):
    f = expr(interval, 2, "abs(x1-x2)", "simplices")
    value, _ = generalized_differential(f, I2, (0.4, 0.4), (1, 1), 1)
    assert value == pytest.approx(-1.0, abs=1e-9)


def test_smooth_function_on_diagonal_vanishes(interval):
    f = expr(interval, 2, "x1*x2 + x1^3", "simplices")
    value, _ = generalized_differential(f, I2, (0.7, 0.7), (1, 1), 1)
    assert value == pytest.approx(0.0, abs=1e-9)


def test_cube_smooth_below_weight_is_exact_zero(interval):
    f = expr(interval, 2, "sin(x1)*x2")
    values, residuals = differential_field(f, I2, np.array([[0.5, 0.5], [0.2, 0.3]]), (1, 1), 1)
    assert values.tolist() == [0.0, 0.0]
    assert residuals.tolist() == [0.0, 0.0]


def test_differential_field_matches_pointwise(interval):
    f = expr(interval, 2, "sin(pi*x1)*x2^2 + x1")
    points = np.array([[0.2, 0.3], [0.5, 0.9], [0.75, 0.25]])
    values, _ = differential_field(f, I2, points, (1, 0), 1)
    for x, value in zip(points, values):
        assert value == pytest.approx(generalized_differential(f, I2, x, (1, 0), 1)[0])
        assert value == pytest.approx(math.pi * math.cos(math.pi * x[0]) * x[1] ** 2 + 1, abs=1e-7)


def test_degenerate_radius(interval):
    f = expr(interval, 2, "abs(x1-x2)", "simplices")
    with pytest.raises(DegenerateRadius):
        generalized_differential(f, I2, (0.5, 0.5 + 1e-6), (1, 1), 2)


@pytest.mark.parametrize("text, delta", [
    ("abs(x1-x2)", -2.0),
    ("max(x1,x2)", -1.0),
    ("min(x1,x2)", 1.0),
    ("x1^2*x2", 0.0),
])
def test_zhang_delta(interval, text, delta):
    f = expr(interval, 2, text, "simplices")
    assert zhang_delta(f, I2, (0.35, 0.35)) == pytest.approx(delta, abs=1e-9)


def test_zhang_delta_needs_diagonal(interval):
    with pytest.raises(ValueError):
        zhang_delta(expr(interval, 2, "x1", "simplices"), I2, (0.3, 0.4))


# =============================================================================
# Integrals
# =============================================================================

def test_integrate_constant_grid(path_graph):
    grid = constant_grid(path_graph, 2, 2, Fraction(3, 2))
    assert integrate_grid_product([(grid, (0, 0))], 2) == 6
    assert integrate_grid_product([(grid, (1, 0)), (grid, (0, 0))], 2) == 0


def test_integrate_linear_grid_d1(interval):
    grid = standard_approximation(expr(interval, 1, "x1"), 1)
    assert integrate_grid_product([(grid, (1,)), (grid, (1,))], 1) == Fraction(1, 4)
    with pytest.raises(LevelMismatch):
        integrate_grid_product([(grid, (1,))], 2)


def test_integrate_diagonal_examples(interval):
    ones = lambda chart, points: np.ones(len(points))  # noqa: E731
    assert integrate_diagonal(interval, 2, Partition.coarsest(2), ones, 8) == pytest.approx(1)
    assert integrate_diagonal(interval, 2, Partition.discrete(2), ones, 8) == pytest.approx(1)
    first = lambda chart, points: points[:, 0]  # noqa: E731
    for m in (1, 2, 7):
        assert integrate_diagonal(interval, 2, Partition.coarsest(2), first, m) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        integrate_diagonal(interval, 2, Partition.coarsest(2), ones, 0)


def test_integrate_diagonal_sums_charts(path_graph):
    ones = lambda chart, points: np.ones(len(points))  # noqa: E731
    assert integrate_diagonal(path_graph, 3, Partition.from_blocks([[1], [2, 3]]), ones, 4) == pytest.approx(8)


def test_cell_partition_masks():
    masks = cell_partition_masks(2, 3)
    assert list(masks) == [Partition.discrete(2), Partition.coarsest(2)]
    assert masks[Partition.discrete(2)].sum() == 6
    assert masks[Partition.coarsest(2)].sum() == 3


@pytest.mark.parametrize("d, n", [(2, 1), (2, 3), (2, 8), (3, 2), (3, 5), (3, 8)])
def test_subdivision_identity(d, n):
    rng = random.Random(d * 100 + n)
    cells = np.empty((n,) * d, dtype=object)
    for index in itertools.product(range(n), repeat=d):
        cells[index] = Fraction(rng.randint(-20, 20), rng.randint(1, 6))
    for p in all_partitions(d):
        pixelated = pixelated_integral(cells, n, p)
        diagonal = diagonal_cell_integral(cells, n, p)
        assert pixelated == Fraction(n) ** (p.size - d) * diagonal


def test_subdivision_identity_needs_the_indicator():
    n = 4
    ones = np.full((n, n), Fraction(1), dtype=object)
    # the discrete stratum misses the n diagonal cells
    assert pixelated_integral(ones, n, Partition.discrete(2)) == 1 - Fraction(1, n)


def test_rebase_keeps_lattice_deltas_and_scales_integrals(interval):
    rng = random.Random(17)
    grid = random_grid(interval, 2, 4, rng)
    sub, _ = subdivide(interval, 2)
    rebased = rebase(grid, 2)
    assert rebased.graph == sub and rebased.n == 2
    assert len(rebased.values) == len(charts(sub, 2))
    # cell (3, 1) of level 4 is cell (1, 1) of sub edges (1, 0) at level 2
    for v in itertools.product((0, 1), repeat=2):
        assert lattice_delta(grid, LatticePoint(I2, (3, 1), 4), v) == \
            lattice_delta(rebased, LatticePoint(Chart((1, 0)), (1, 1), 2), v)
    factors = [(1, 0), (0, 1), (1, 1)]
    assert integrate_grid_product([(rebased, v) for v in factors], 2) == \
        4 * integrate_grid_product([(grid, v) for v in factors], 4)
    with pytest.raises(LevelMismatch):
        rebase(grid, 3)


def test_smoothness_enum():
    assert Smoothness("cubes") is Smoothness.CUBES
    assert Smoothness.SIMPLICES.value == "simplices"
