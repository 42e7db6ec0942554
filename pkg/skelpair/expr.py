"""
Expression language for piecewise-smooth functions on cube charts.

A small precedence-climbing parser over the grammar

    expr   := expr ('+'|'-') expr | expr ('*'|'/') expr | '-' expr
            | expr '^' int | atom
    atom   := number | x1..x9.. | pi | name '(' expr {',' expr} ')' | '(' expr ')'

with power binding tightest, then unary minus, then * and /, then + and -.
Functions: sin, cos, exp, abs (one argument), min, max (two or more).

Nodes evaluate vectorized over numpy arrays of points, and exactly over
Fractions when the expression uses no transcendental function or pi.

Usage:
    from skelpair.expr import parse_expr, evaluate_points

    node = parse_expr("abs(x1-x2)")
    evaluate_points(node, np.array([[0.3, 0.8]]))   # array([0.5])
    node.exact((Fraction(1, 3), Fraction(1, 2)))    # Fraction(1, 6)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from skelpair.errors import ArityMismatch, EvalError, ExprSyntaxError, UnknownIdentifier

# Binary operators in groups of increasing precedence; unary minus and power
# bind tighter than all of them.
OPERATORS = [
    [("+", "left"), ("-", "left")],
    [("*", "left"), ("/", "left")],
]
OPERATOR_PREC = {op: idx for idx, group in enumerate(OPERATORS) for op, _ in group}

FUNCTIONS: dict[str, tuple[int, int | None]] = {
    "sin": (1, 1),
    "cos": (1, 1),
    "exp": (1, 1),
    "abs": (1, 1),
    "min": (2, None),
    "max": (2, None),
}
TRANSCENDENTAL = {"sin", "cos", "exp"}

_VARIABLE = re.compile(r"x([1-9][0-9]*)")
_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class NotRational(Exception):
    """Raised by exact evaluation on a node without an exact rational value."""


# =============================================================================
# AST
# =============================================================================

class Node:
    """Base class of expression nodes."""

    def values(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def exact(self, point: Sequence[Fraction]) -> Fraction:
        raise NotImplementedError

    def children(self) -> tuple[Node, ...]:
        return ()

    def walk(self):
        yield self
        for child in self.children():
            yield from child.walk()

    def is_rational(self) -> bool:
        return not any(isinstance(n, Pi) or (isinstance(n, Call) and n.name in TRANSCENDENTAL)
                       for n in self.walk())


@dataclass(frozen=True)
class Num(Node):
    value: Fraction
    text: str

    def values(self, points):
        return np.full(points.shape[0], float(self.value))

    def exact(self, point):
        return self.value

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class Var(Node):
    index: int

    def values(self, points):
        return points[:, self.index - 1].astype(float)

    def exact(self, point):
        return Fraction(point[self.index - 1])

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class Pi(Node):
    def values(self, points):
        return np.full(points.shape[0], np.pi)

    def exact(self, point):
        raise NotRational("pi")

    def __str__(self):
        return "pi"


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def values(self, points):
        return -self.arg.values(points)

    def exact(self, point):
        return -self.arg.exact(point)

    def children(self):
        return (self.arg,)

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def values(self, points):
        a, b = self.left.values(points), self.right.values(points)
        match self.op:
            case "+":
                return a + b
            case "-":
                return a - b
            case "*":
                return a * b
            case "/":
                if np.any(b == 0):
                    raise EvalError(str(self), "division by zero")
                return a / b
        raise AssertionError(self.op)

    def exact(self, point):
        a, b = self.left.exact(point), self.right.exact(point)
        match self.op:
            case "+":
                return a + b
            case "-":
                return a - b
            case "*":
                return a * b
            case "/":
                if b == 0:
                    raise EvalError(str(self), "division by zero")
                return a / b
        raise AssertionError(self.op)

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int

    def values(self, points):
        b = self.base.values(points)
        if self.exponent < 0 and np.any(b == 0):
            raise EvalError(str(self), "zero to a negative power")
        return b ** float(self.exponent)

    def exact(self, point):
        b = self.base.exact(point)
        if self.exponent < 0 and b == 0:
            raise EvalError(str(self), "zero to a negative power")
        return b ** self.exponent

    def children(self):
        return (self.base,)

    def __str__(self):
        return f"({self.base}^{self.exponent})"


_UFUNCS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
}


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple[Node, ...]

    def values(self, points):
        vals = [a.values(points) for a in self.args]
        if self.name == "min":
            return np.minimum.reduce(vals)
        if self.name == "max":
            return np.maximum.reduce(vals)
        out = _UFUNCS[self.name](vals[0])
        if not np.all(np.isfinite(out)):
            raise EvalError(str(self), "result is not finite")
        return out

    def exact(self, point):
        if self.name in TRANSCENDENTAL:
            raise NotRational(self.name)
        vals = [a.exact(point) for a in self.args]
        match self.name:
            case "abs":
                return abs(vals[0])
            case "min":
                return min(vals)
            case "max":
                return max(vals)
        raise AssertionError(self.name)

    def children(self):
        return self.args

    def __str__(self):
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


# =============================================================================
# Tokenizer
# =============================================================================

@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    pos: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    idx = 0
    while idx < len(source):
        c = source[idx]
        if c.isspace():
            idx += 1
            continue
        if c.isdigit() or (c == "." and idx + 1 < len(source) and source[idx + 1].isdigit()):
            match = _NUMBER.match(source, idx)
            assert match is not None
            tokens.append(Token("num", match.group(0), idx))
            idx = match.end()
            continue
        if source.startswith("**", idx):
            tokens.append(Token("op", "^", idx))
            idx += 2
            continue
        if c in "+-*/^(),":
            tokens.append(Token("op", c, idx))
            idx += 1
            continue
        if match := _NAME.match(source, idx):
            tokens.append(Token("name", match.group(0), idx))
            idx = match.end()
            continue
        raise ExprSyntaxError(idx, ("number", "identifier", "operator"), source)
    tokens.append(Token("end", "", len(source)))
    return tokens


# =============================================================================
# Parser
# =============================================================================

class _Parser:
    def __init__(self, source: str, d: int | None = None):
        self.source = source
        self.d = d
        self.tokens = tokenize(source)
        self.idx = 0

    def peek(self) -> Token:
        return self.tokens[self.idx]

    def advance(self) -> Token:
        token = self.tokens[self.idx]
        self.idx += 1
        return token

    def fail(self, expected: tuple[str, ...]):
        raise ExprSyntaxError(self.peek().pos, expected, self.source)

    def expect(self, text: str) -> Token:
        if self.peek().text != text or self.peek().kind != "op":
            self.fail((repr(text),))
        return self.advance()

    def parse(self) -> Node:
        node = self.expression(0)
        if self.peek().kind != "end":
            self.fail(("operator", "end of input"))
        return node

    def expression(self, min_prec: int) -> Node:
        lhs = self.unary()
        while (token := self.peek()).kind == "op" and token.text in OPERATOR_PREC:
            prec = OPERATOR_PREC[token.text]
            if prec < min_prec:
                break
            self.advance()
            rhs = self.expression(prec + 1)
            lhs = BinOp(token.text, lhs, rhs)
        return lhs

    def unary(self) -> Node:
        token = self.peek()
        if token.kind == "op" and token.text in "+-":
            self.advance()
            arg = self.unary()
            return Neg(arg) if token.text == "-" else arg
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        while self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            node = Pow(node, self.exponent())
        return node

    def exponent(self) -> int:
        sign = 1
        parens = False
        if self.peek().text == "(" and self.peek().kind == "op":
            self.advance()
            parens = True
        if self.peek().kind == "op" and self.peek().text in "+-":
            sign = -1 if self.advance().text == "-" else 1
        token = self.peek()
        if token.kind != "num" or not token.text.isdigit():
            self.fail(("integer exponent",))
        self.advance()
        if parens:
            self.expect(")")
        return sign * int(token.text)

    def atom(self) -> Node:
        token = self.peek()
        if token.kind == "num":
            value = Fraction(token.text)
            try:
                float(value)
            except OverflowError:
                raise ExprSyntaxError(token.pos, ("finite number",), self.source) from None
            self.advance()
            return Num(value, token.text)
        if token.kind == "op" and token.text == "(":
            self.advance()
            node = self.expression(0)
            self.expect(")")
            return node
        if token.kind == "name":
            self.advance()
            return self.identifier(token)
        self.fail(("number", "identifier", "'('"))
        raise AssertionError("unreachable")

    def identifier(self, token: Token) -> Node:
        name = token.text
        if name in FUNCTIONS:
            self.expect("(")
            args = [self.expression(0)]
            while self.peek().kind == "op" and self.peek().text == ",":
                self.advance()
                args.append(self.expression(0))
            self.expect(")")
            low, high = FUNCTIONS[name]
            if len(args) < low or (high is not None and len(args) > high):
                expected = str(low) if high == low else f"at least {low}"
                raise ArityMismatch(name, expected, len(args))
            return Call(name, tuple(args))
        if name == "pi":
            return Pi()
        if (match := _VARIABLE.fullmatch(name)) and (self.d is None or int(match.group(1)) <= self.d):
            return Var(int(match.group(1)))
        raise UnknownIdentifier(name, token.pos)


def parse_expr(text: str, d: int | None = None) -> Node:
    """
    Parse an expression; with `d` given, only x1..xd are known variables.

    Raises:
        ExprSyntaxError: with the offending position and the expected tokens
        UnknownIdentifier, ArityMismatch
    """
    return _Parser(text, d).parse()


# =============================================================================
# Evaluation
# =============================================================================

def evaluate_points(node: Node, points: np.ndarray) -> np.ndarray:
    """
    Evaluate at each row of `points` in double precision.

    Raises:
        EvalError: division by zero, non-finite results, floating-point faults
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    try:
        with np.errstate(divide="raise", over="raise", invalid="raise"):
            return np.asarray(node.values(points), dtype=float)
    except FloatingPointError as e:
        raise EvalError(str(node), str(e)) from e


def evaluate_exact(node: Node, point: Sequence[Fraction]) -> Fraction | None:
    """Exact value at a rational point, or None if the node needs floating point."""
    try:
        return node.exact(point)
    except NotRational:
        return None
