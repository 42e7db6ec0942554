"""
Exact sparse Gauss-Jordan elimination over the rationals.

EliminationMatrix keeps a reduced set of linear equations. Every kept row has a
pivot variable that occurs in no other row, so after all equations are added a
row whose only other entry is the constant term fixes its pivot's value.

Equations are mappings variable -> Fraction; the key CONSTANT holds the constant
term, so {x: 1, y: -1, CONSTANT: 2} means x - y + 2 = 0.

Usage:
    from skelpair.linsolve import CONSTANT, EliminationMatrix

    m = EliminationMatrix()
    m.add({"x": 1, "y": 1, CONSTANT: -3})
    m.add({"x": 1, "y": -1, CONSTANT: -1})
    values, free = m.solution(["x", "y"])   # {'x': 2, 'y': 1}, []
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Hashable, Iterable, Mapping


class _Constant:
    def __repr__(self) -> str:
        return "CONSTANT"


CONSTANT = _Constant()
"""Key of the constant term in an equation row."""


class Inconsistent(ValueError):
    """An equation reduced to a nonzero constant."""


class EliminationMatrix:
    def __init__(self, order_key=None):
        # pivot -> row (pivot coefficient 1)
        self.rows: dict[Hashable, dict[Hashable, Fraction]] = {}
        # variable -> pivots of rows containing it (pivots themselves excluded)
        self.cols: defaultdict[Hashable, set[Hashable]] = defaultdict(set)
        self._order_key = order_key or (lambda var: var)

    def __len__(self) -> int:
        return len(self.rows)

    def _reduce(self, row: dict[Hashable, Fraction]) -> None:
        """Eliminate all current pivots from `row` in place."""
        for pivot in [x for x in row if x in self.rows]:
            coef = row.pop(pivot)
            for x, c in self.rows[pivot].items():
                if x == pivot:
                    continue
                value = row.get(x, Fraction(0)) - coef * c
                if value:
                    row[x] = value
                else:
                    row.pop(x, None)

    def add(self, equation: Mapping[Hashable, Fraction | int]) -> bool:
        """
        Add an equation; returns False if it was already implied.

        Raises:
            Inconsistent: if the equation contradicts the ones added before
        """
        row = {x: Fraction(c) for x, c in equation.items() if c}
        self._reduce(row)

        candidates = [x for x in row if x is not CONSTANT]
        if not candidates:
            if row.get(CONSTANT):
                raise Inconsistent(f"0 = {-row[CONSTANT]}")
            return False

        pivot = min(candidates, key=lambda x: (len(self.cols[x]), self._order_key(x)))
        scale = row[pivot]
        row = {x: c / scale for x, c in row.items()}

        # eliminate the new pivot from every row that mentions it
        for other in list(self.cols.pop(pivot, ())):
            target = self.rows[other]
            coef = target.pop(pivot)
            for x, c in row.items():
                if x == pivot:
                    continue
                value = target.get(x, Fraction(0)) - coef * c
                if value:
                    target[x] = value
                    if x is not CONSTANT:
                        self.cols[x].add(other)
                else:
                    target.pop(x, None)
                    if x is not CONSTANT:
                        self.cols[x].discard(other)

        self.rows[pivot] = row
        for x in row:
            if x != pivot and x is not CONSTANT:
                self.cols[x].add(pivot)
        return True

    def solution(
        self, variables: Iterable[Hashable]
    ) -> tuple[dict[Hashable, Fraction], list[Hashable]]:
        """
        Values of the determined variables and the list of undetermined ones.

        A variable is determined when it is a pivot whose row holds nothing but
        the constant term besides it.
        """
        values: dict[Hashable, Fraction] = {}
        free: list[Hashable] = []
        for x in variables:
            row = self.rows.get(x)
            if row is not None and all(y == x or y is CONSTANT for y in row):
                values[x] = -row.get(CONSTANT, Fraction(0))
            else:
                free.append(x)
        return values, free
