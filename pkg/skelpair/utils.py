"""
Utility functions for skelpair.

Rational formatting and parsing shared by the models, loaders and writers.
"""

from fractions import Fraction
from typing import Any


def compact_dict(**kwargs: Any) -> dict[str, Any]:
    """
    Build a dictionary excluding None values.

    Used for report metadata where None means "not applicable".

    Example:
        meta = compact_dict(d=2, n=n, m=None)  # {'d': 2, 'n': 4}
    """
    return {k: v for k, v in kwargs.items() if v is not None}


def format_rational(value: Fraction | int) -> str:
    """
    Render an exact value as "p/q" in lowest terms with q > 0.

    Integers keep the denominator: 5 -> "5/1".
    """
    q = Fraction(value)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str | int | Fraction) -> Fraction:
    """
    Parse "p/q", an integer or a decimal string into an exact Fraction.

    Raises:
        ValueError: if the text is not a rational literal
    """
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float) or isinstance(text, bool):
        raise ValueError(f"expected a rational string, got {text!r}")
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational literal: {text!r}") from e


def bits_label(bits: tuple[int, ...]) -> str:
    """Binary notation of a bit vector, e.g. (1, 0, 1) -> "101"."""
    return "".join(str(b) for b in bits)


def format_value(value: Fraction | float | int) -> str:
    """CSV form of an exact-or-real value: "p/q" for exact, shortest repr for floats."""
    if isinstance(value, float):
        return repr(value)
    return format_rational(value)
