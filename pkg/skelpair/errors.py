"""
Error hierarchy for skelpair.

Input problems (malformed graphs, bad expressions, mismatched levels) derive from
InputError; failures while computing (solver trouble, numerics) derive from
ComputationError. The CLI maps the two families to exit codes 3 and 4.

Usage:
    from skelpair.errors import SelfLoop

    raise SelfLoop(vertex="a")
"""

from __future__ import annotations

from typing import Any


class SkelpairError(Exception):
    """Base class for all skelpair errors."""

    exit_code: int = 1

    def __init__(self, message: str, **detail: Any):
        super().__init__(message)
        self.message = message
        self.detail = detail

    def to_json(self) -> dict[str, Any]:
        """Machine-readable form written to stderr by the CLI."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "detail": {k: _jsonable(v) for k, v in self.detail.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return str(value)


# =============================================================================
# Input validation (exit 3)
# =============================================================================

class InputError(SkelpairError):
    exit_code = 3


class SelfLoop(InputError):
    def __init__(self, vertex: str):
        super().__init__(f"edge from {vertex!r} to itself", vertex=vertex)


class ParallelEdge(InputError):
    def __init__(self, tail: str, head: str):
        super().__init__(f"edge {tail!r}-{head!r} appears more than once", tail=tail, head=head)


class UnknownVertex(InputError):
    def __init__(self, vertex: str):
        super().__init__(f"edge refers to unknown vertex {vertex!r}", vertex=vertex)


class DuplicateVertex(InputError):
    def __init__(self, vertex: str):
        super().__init__(f"vertex {vertex!r} listed twice", vertex=vertex)


class NotInner(InputError):
    def __init__(self, point: Any):
        super().__init__("point has a coordinate on the cube boundary", point=point)


class TooLarge(InputError):
    def __init__(self, what: str, value: int, limit: int):
        super().__init__(f"{what}={value} exceeds the supported maximum {limit}",
                         what=what, value=value, limit=limit)


class ExprSyntaxError(InputError):
    """Parse failure; `position` is a 0-based character offset."""

    def __init__(self, position: int, expected: tuple[str, ...], text: str = ""):
        wanted = ", ".join(expected)
        super().__init__(f"syntax error at position {position}: expected {wanted}",
                         position=position, expected=expected, text=text)
        self.position = position
        self.expected = expected


class UnknownIdentifier(InputError):
    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier {name!r} at position {position}",
                         name=name, position=position)
        self.name = name
        self.position = position


class ArityMismatch(InputError):
    def __init__(self, name: str, expected: str, got: int):
        super().__init__(f"{name}() takes {expected} argument(s), got {got}",
                         name=name, expected=expected, got=got)


class LevelMismatch(InputError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"subdivision level mismatch: expected {expected}, got {got}",
                         expected=expected, got=got)


class DegreeMismatch(InputError):
    def __init__(self, expected: int, got: int, what: str = "degree"):
        super().__init__(f"{what} mismatch: expected {expected}, got {got}",
                         expected=expected, got=got, what=what)


class SmoothnessClassMismatch(InputError):
    def __init__(self, required: str, got: str):
        super().__init__(f"function must be smooth on {required}, declared {got}",
                         required=required, got=got)


class GluingMismatch(InputError):
    def __init__(self, vertex: Any, first: Any, second: Any):
        super().__init__(f"grid values disagree at shared vertex {vertex}",
                         vertex=vertex, first=first, second=second)


class MalformedDocument(InputError):
    def __init__(self, source: str, reason: str):
        super().__init__(f"{source}: {reason}", source=source, reason=reason)


# =============================================================================
# Computation (exit 4)
# =============================================================================

class ComputationError(SkelpairError):
    exit_code = 4


class InconsistentRelations(ComputationError):
    def __init__(self, d: int):
        super().__init__(f"degree relations for d={d} have no solution", d=d)


class Underdetermined(ComputationError):
    def __init__(self, d: int, monomials: list[str]):
        super().__init__(f"{len(monomials)} monomial degree(s) left free for d={d}",
                         d=d, monomials=monomials)
        self.monomials = monomials


class EvalError(ComputationError):
    def __init__(self, node: str, reason: str):
        super().__init__(f"cannot evaluate {node}: {reason}", node=node, reason=reason)


class OutOfRange(ComputationError):
    def __init__(self, point: Any, h: float):
        super().__init__("difference cube leaves the open chart", point=point, h=h)


class DegenerateRadius(ComputationError):
    def __init__(self, point: Any, radius: float, h_min: float):
        super().__init__(f"safe step {radius:.3g} below minimum {h_min:.3g}",
                         point=point, radius=radius, h_min=h_min)


class VanishingConditionUnverified(ComputationError):
    def __init__(self, d: int, reason: str):
        super().__init__(f"vanishing condition for d={d} not verified: {reason}", d=d, reason=reason)


class Timeout(ComputationError):
    def __init__(self, stage: str, d: int, seconds: float):
        super().__init__(f"{stage} for d={d} exceeded {seconds:g}s", stage=stage, d=d, seconds=seconds)
