"""
Base models for skelpair reports and input documents.

Provides SkelModel base class and the Rational field type, which carries an exact
Fraction in memory and serializes as "p/q".
"""

from fractions import Fraction
from typing import Annotated, Any

from pydantic import BaseModel, ConfigDict, PlainSerializer, PlainValidator

from skelpair.utils import format_rational, parse_rational


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, float):
        return Fraction(value)
    return parse_rational(value)


Rational = Annotated[
    Fraction,
    PlainValidator(_to_fraction),
    PlainSerializer(format_rational, return_type=str),
]
"""Exact rational field; JSON form is "p/q" in lowest terms."""


def _exact_or_real(value: Any) -> Fraction | float:
    if isinstance(value, float):
        return value
    return _to_fraction(value)


def _dump_exact_or_real(value: Fraction | float) -> str | float:
    return value if isinstance(value, float) else format_rational(value)


ExactOrReal = Annotated[
    Fraction | float,
    PlainValidator(_exact_or_real),
    PlainSerializer(_dump_exact_or_real),
]
"""Either an exact value ("p/q" in JSON) or a float (JSON number)."""


class SkelModel(BaseModel):
    """
    Base model for all reports and documents.

    Features:
    - frozen=True: reports are immutable once assembled
    - populate_by_name=True: aliased fields accept their Python name too
    - arbitrary_types_allowed=True: Fraction fields validate through Rational

    Example:
        class Row(SkelModel):
            value: Rational
            tuple_: list[str] = Field(alias='tuple')

        Row(value="3/2", tuple=["10", "01"]).model_dump(mode='json', by_alias=True)
    """
    model_config = ConfigDict(populate_by_name=True, frozen=True, arbitrary_types_allowed=True)
