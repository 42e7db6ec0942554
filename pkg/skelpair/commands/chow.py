"""Degree tables and the vanishing condition of the cube Chow ring."""

from fractions import Fraction
from typing import Literal

import logfire

from skelpair.chowring import (
    DegreeTableReport,
    VanishingReport,
    build_degree_table,
    check_vanishing,
    degree_rows,
    f_degree,
    nonzero_tuples,
)
from skelpair.pairing import CUBE3_MULTISETS, ZHANG_MULTISET
from skelpair.registry import action, all_action


@action("table")
def table(*, d: int, basis: Literal["fourier", "vertex"] = "fourier", nonzero: bool = False) -> DegreeTableReport:
    """
    Emit the local degree table of C(I^d).

    :param d: Cube dimension (1..5; the Fourier table needs d <= 4).
    :param basis: "fourier" for ldeg(F_v0 ... F_vd) per multiset, "vertex" for the monomial degrees.
    :param nonzero: Only rows with nonzero degree.
    """
    return degree_rows(build_degree_table(d), basis=basis, nonzero_only=nonzero)


@action("vanishing")
def vanishing(*, d: int, time_limit: float | None = None) -> VanishingReport:
    """
    Check the vanishing condition; exit code 0 iff there are no violations.

    :param d: Cube dimension.
    :param time_limit: Seconds allowed for each of the table solve and the check; exit 4 with Timeout when exceeded.
    """
    return check_vanishing(d, build_degree_table(d, time_limit=time_limit), time_limit=time_limit)


@all_action
def all() -> int:
    """Check the degree goldens for d = 1, 2, 3 and the vanishing condition."""
    failures = 0

    t1 = build_degree_table(1)
    if f_degree(1, [(1,), (1,)], t1) == -4:
        logfire.info("✓ d=1: ldeg(F_1^2) = -4")
    else:
        failures += 1
        logfire.error(f"d=1: ldeg(F_1^2) = {f_degree(1, [(1,), (1,)], t1)}, expected -4")

    t2 = build_degree_table(2)
    expected2 = {tuple(sorted(ZHANG_MULTISET)): Fraction(16), ((1, 1),) * 3: Fraction(-32)}
    found2 = {tuple(sorted(tup)): f_degree(2, tup, t2) for tup in nonzero_tuples(t2)}
    if found2 == expected2:
        logfire.info("✓ d=2: ldeg(F_11^3) = -32, ldeg(F_10 F_01 F_11) = 16, all others 0")
    else:
        failures += 1
        logfire.error(f"d=2 F-degrees differ: {found2}")

    t3 = build_degree_table(3)
    weight6 = {tuple(sorted(tup)): f_degree(3, tup, t3) for tup in nonzero_tuples(t3)
               if sum(sum(v) for v in tup) == 6}
    if weight6 == {tuple(sorted(ms)): Fraction(-64) for ms in CUBE3_MULTISETS}:
        logfire.info("✓ d=3: weight-6 F-degrees are -64 on the four cube multisets, 0 elsewhere")
    else:
        failures += 1
        logfire.error(f"d=3 weight-6 F-degrees differ: {weight6}")

    for d, t in ((1, t1), (2, t2), (3, t3)):
        report = check_vanishing(d, t)
        if report.passed:
            logfire.info(f"✓ vanishing condition d={d}: {report.checked_tuples} tuples, no violations")
        else:
            failures += 1

    return 1 if failures else 0
