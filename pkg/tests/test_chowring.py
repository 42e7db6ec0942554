import itertools
import os
from fractions import Fraction

import pytest

from skelpair.chowring import (
    ChowElement,
    build_degree_table,
    chain_monomials,
    check_vanishing,
    cube_vertices,
    degree_rows,
    expand_F,
    f_degree,
    f_degree_by_product,
    is_chain,
    ldeg,
    multiply,
    nonzero_tuples,
    psi,
    rewrite_degree,
)
from skelpair.errors import DegreeMismatch, Timeout, TooLarge, Underdetermined
from skelpair.pairing import CUBE3_MULTISETS


def C(bits: str) -> ChowElement:
    return ChowElement.vertex(tuple(int(b) for b in bits))


# =============================================================================
# Ring arithmetic
# =============================================================================

@pytest.mark.parametrize("support, expected", [
    ([(0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1)], True),
    ([(1, 0), (0, 1)], False),
    ([(0, 1)], True),
    ([(0, 1), (0, 1), (1, 1)], True),
])
def test_is_chain(support, expected):
    assert is_chain(support) is expected


def test_expand_F():
    assert expand_F((1,)).terms == {((0,),): 1, ((1,),): -1}
    assert expand_F((0,)).terms == {((0,),): 1, ((1,),): 1}
    assert expand_F((1, 1)) == C("00") - C("01") - C("10") + C("11")


def test_multiply():
    assert multiply(C("0") - C("1"), C("0") + C("1")) == C("0") * C("0") - C("1") * C("1")
    assert not multiply(C("10"), C("01")).terms
    square = multiply(expand_F((0,)), expand_F((0,)))
    assert square.terms == {((0,), (0,)): 1, ((0,), (1,)): 2, ((1,), (1,)): 1}


def test_add_rejects_mixed_degrees():
    with pytest.raises(DegreeMismatch):
        C("01") + C("01") * C("11")


def test_psi():
    assert psi(C("00")) == C("11")
    for v in cube_vertices(3):
        sign = (-1) ** sum(v)
        assert psi(expand_F(v)) == expand_F(v).scale(sign)
    e = C("010") * C("011") - C("111") * C("111")
    assert psi(psi(e)) == e


def test_chain_monomials_d1():
    assert chain_monomials(1, 2) == [((0,), (0,)), ((0,), (1,)), ((1,), (1,))]


# =============================================================================
# Degree tables
# =============================================================================

def test_table_d1(table1):
    assert table1.value([(0,), (1,)]) == 1
    assert table1.value([(0,), (0,)]) == -1
    assert table1.value([(1,), (1,)]) == -1
    assert ldeg(expand_F((1,)) * expand_F((1,)), table1) == -4
    assert ldeg(expand_F((0,)) * expand_F((1,)), table1) == 0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_maximal_chains_have_degree_one(d):
    t = build_degree_table(d)
    for chain in itertools.permutations(range(d)):
        v = [0] * d
        monomial = [tuple(v)]
        for axis in chain:
            v[axis] = 1
            monomial.append(tuple(v))
        assert t.value(monomial) == 1


def test_non_chain_monomial_is_zero(table2):
    assert table2.value([(1, 0), (0, 1), (1, 1)]) == 0


def test_ldeg_checks_degree(table2):
    with pytest.raises(DegreeMismatch):
        ldeg(C("11") * C("11"), table2)


def test_table_guard():
    with pytest.raises(TooLarge):
        build_degree_table(6)


def test_d2_goldens(table2):
    """F-degrees of degree 3 in dimension 2: -32 on F_11^3, 16 on F_10 F_01 F_11, zero elsewhere."""
    zhang = sorted([(1, 0), (0, 1), (1, 1)])
    for tup in itertools.product(cube_vertices(2), repeat=3):
        value = f_degree(2, tup, table2)
        if sorted(tup) == zhang:
            assert value == 16
        elif tup == ((1, 1),) * 3:
            assert value == -32
        else:
            assert value == 0, tup
    assert len(nonzero_tuples(table2)) == 7


def test_d3_goldens(table3):
    wanted = {tuple(sorted(ms)) for ms in CUBE3_MULTISETS}
    for tup in itertools.combinations_with_replacement(cube_vertices(3), 4):
        if sum(sum(v) for v in tup) != 6:
            continue
        assert f_degree(3, tup, table3) == (-64 if tuple(sorted(tup)) in wanted else 0), tup


@pytest.mark.parametrize("d", [1, 2, 3])
def test_psi_parity_and_zero_absorption(d):
    t = build_degree_table(d)
    for tup in itertools.combinations_with_replacement(cube_vertices(d), d + 1):
        value = f_degree(d, tup, t)
        if sum(sum(v) for v in tup) % 2 or (0,) * d in tup:
            assert value == 0, tup


def test_coordinate_permutation_symmetry(table3):
    for tup in nonzero_tuples(table3)[:40]:
        for perm in itertools.permutations(range(3)):
            moved = [tuple(v[i] for i in perm) for v in tup]
            assert f_degree(3, moved, table3) == f_degree(3, tup, table3)


def test_psi_preserves_vertex_degrees(table2):
    for m, value in table2.entries.items():
        flipped = [tuple(1 - b for b in v) for v in m]
        assert table2.value(flipped) == value


def test_fourier_tensor_matches_product_expansion(table2):
    for tup in itertools.combinations_with_replacement(cube_vertices(2), 3):
        assert table2.fourier.value(tup) == f_degree_by_product(tup, table2)


@pytest.mark.parametrize("d", [1, 2])
def test_rewriting_oracle_agrees(d):
    t = build_degree_table(d)
    resolved = 0
    for m in chain_monomials(d, d + 1):
        value = rewrite_degree(m, d)
        if value is not None:
            resolved += 1
            assert value == t.value(m), m
    assert resolved > 0


def test_rewriting_oracle_prunes_non_chains():
    assert rewrite_degree([(1, 0), (0, 1), (1, 1)], 2) == 0


# =============================================================================
# Vanishing condition
# =============================================================================

@pytest.mark.parametrize("d", [1, 2, 3])
def test_vanishing_condition_holds(d):
    report = check_vanishing(d, build_degree_table(d))
    assert report.passed
    assert report.exit_code == 0
    assert report.violations == []
    assert report.checked_tuples == (2 ** d) ** (d + 1) * report.partitions


def test_vanishing_check_reports_timeout(table2):
    with pytest.raises(Timeout) as info:
        check_vanishing(2, table2, time_limit=0)
    assert info.value.detail["stage"] == "vanishing check"


def test_table_solve_reports_timeout():
    with pytest.raises(Timeout):
        build_degree_table(4, time_limit=0)


@pytest.mark.skipif(not os.getenv("SKELPAIR_STRETCH"), reason="d=4 solve is long; set SKELPAIR_STRETCH=1")
def test_vanishing_condition_d4():
    limit = float(os.getenv("SKELPAIR_STRETCH_SECONDS", "3600"))
    try:
        report = check_vanishing(4, build_degree_table(4, time_limit=limit), time_limit=limit)
    except (Timeout, Underdetermined) as e:
        pytest.skip(f"d=4 not settled: {e}")
    assert report.passed


def test_vanishing_report_json(table2):
    data = check_vanishing(2, table2).model_dump(mode="json", by_alias=True)
    assert data["violations"] == []
    assert data["partitions"] == 2


# =============================================================================
# Export
# =============================================================================

def test_degree_rows(table2):
    report = degree_rows(table2, nonzero_only=True)
    rows = {" ".join(r.tuple_): r.ldeg for r in report.rows}
    assert rows == {"01 10 11": Fraction(16), "11 11 11": Fraction(-32)}
    assert report.csv_rows() == [["01 10 11", "16/1"], ["11 11 11", "-32/1"]]


def test_degree_rows_vertex_basis(table1):
    report = degree_rows(table1, basis="vertex")
    assert [(r.tuple_, r.ldeg) for r in report.rows] == [
        (["0", "0"], -1), (["0", "1"], 1), (["1", "1"], -1),
    ]
