from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Mapping

from ..exceptions import InvalidExpressionError

Number = Fraction | float

UNARY_OPS = ("neg", "exp", "sin", "cos", "sqrt")
BINARY_OPS = ("add", "sub", "mul", "div", "pow")
FUNCTIONS = ("exp", "sin", "cos", "sqrt")


@dataclass(frozen=True, slots=True)
class Expr:
    """
    Immutable expression tree node.

    ``op`` is one of ``const``, ``var``, the unary ops (``neg``, ``exp``, ``sin``,
    ``cos``, ``sqrt``) or the binary ops (``add``, ``sub``, ``mul``, ``div``, ``pow``).
    Constants hold an exact ``Fraction`` or a finite ``float`` in ``value``; variables
    hold their ``name``. Equality and hashing are structural.
    """

    op: str
    args: tuple[Expr, ...] = ()
    value: Number | None = None
    name: str | None = None

    def __post_init__(self):
        if self.op == "const":
            if isinstance(self.value, float):
                if not math.isfinite(self.value):
                    raise InvalidExpressionError(f"non-finite constant {self.value!r}")
            elif not isinstance(self.value, Fraction):
                raise InvalidExpressionError(f"bad constant {self.value!r}")
        elif self.op == "var":
            if not self.name or not self.name.isidentifier():
                raise InvalidExpressionError(f"bad variable name {self.name!r}")
        elif self.op in UNARY_OPS:
            if len(self.args) != 1:
                raise InvalidExpressionError(f"{self.op} takes one operand")
        elif self.op in BINARY_OPS:
            if len(self.args) != 2:
                raise InvalidExpressionError(f"{self.op} takes two operands")
            if self.op == "pow":
                exponent = self.args[1]
                if exponent.op != "const" or not is_half_integer(exponent.value):
                    raise InvalidExpressionError(
                        "exponent must be an integer or half-integer constant"
                    )
        else:
            raise InvalidExpressionError(f"unknown node kind {self.op!r}")

    # arithmetic sugar, folds trivial identities on the way
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __str__(self):
        from .printer import to_text

        return to_text(self)

    @property
    def is_const(self) -> bool:
        return self.op == "const"

    def is_value(self, number) -> bool:
        return self.op == "const" and self.value == number


def is_half_integer(value) -> bool:
    return isinstance(value, (Fraction, float)) and float(2 * value).is_integer()


def as_number(value) -> Number:
    if isinstance(value, bool):
        raise InvalidExpressionError("booleans are not numbers")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, Real):
        return float(value)
    raise InvalidExpressionError(f"cannot use {value!r} as a number")


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return const(value)


def const(value) -> Expr:
    return Expr("const", value=as_number(value))


def var(name: str) -> Expr:
    return Expr("var", name=name)


ZERO = const(0)
ONE = const(1)


# --------------------------------------------------------------------------- #
# Folding constructors
# --------------------------------------------------------------------------- #
def add(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_value(0):
        return b
    if b.is_value(0):
        return a
    if a.is_const and b.is_const:
        return const(a.value + b.value)
    return Expr("add", (a, b))


def sub(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if b.is_value(0):
        return a
    if a.is_value(0):
        return neg(b)
    if a.is_const and b.is_const:
        return const(a.value - b.value)
    return Expr("sub", (a, b))


def mul(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if a.is_value(0) or b.is_value(0):
        return ZERO
    if a.is_value(1):
        return b
    if b.is_value(1):
        return a
    if a.is_const and b.is_const:
        return const(a.value * b.value)
    if a.is_value(-1):
        return neg(b)
    if b.is_value(-1):
        return neg(a)
    return Expr("mul", (a, b))


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if b.is_value(1):
        return a
    if b.is_const and b.value != 0:
        if a.is_const:
            return const(a.value / b.value)
        if a.is_value(0):
            return ZERO
    elif a.is_value(0) and not b.is_const:
        return ZERO
    return Expr("div", (a, b))


def neg(a) -> Expr:
    a = as_expr(a)
    if a.is_const:
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return Expr("neg", (a,))


def power(base, exponent) -> Expr:
    base = as_expr(base)
    exponent = as_number(exponent.value if isinstance(exponent, Expr) else exponent)
    if isinstance(exponent, float) and is_half_integer(exponent):
        exponent = Fraction(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if base.is_const and float(exponent).is_integer():
        if base.value != 0 or exponent > 0:
            return const(base.value ** int(exponent))
    return Expr("pow", (base, const(exponent)))


def exp(a) -> Expr:
    a = as_expr(a)
    if a.is_value(0):
        return ONE
    return Expr("exp", (a,))


def sin(a) -> Expr:
    a = as_expr(a)
    if a.is_value(0):
        return ZERO
    return Expr("sin", (a,))


def cos(a) -> Expr:
    a = as_expr(a)
    if a.is_value(0):
        return ONE
    return Expr("cos", (a,))


def sqrt(a) -> Expr:
    return Expr("sqrt", (as_expr(a),))


def apply_function(name: str, arg: Expr) -> Expr:
    return {"exp": exp, "sin": sin, "cos": cos, "sqrt": sqrt}[name](arg)


def total(terms) -> Expr:
    result = ZERO
    for term in terms:
        result = add(result, term)
    return result


# --------------------------------------------------------------------------- #
# Tree queries
# --------------------------------------------------------------------------- #
def free_symbols(e: Expr) -> frozenset[str]:
    found: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if node.op == "var":
            found.add(node.name)
        else:
            stack.extend(node.args)
    return frozenset(found)


def substitute(e: Expr, mapping: Mapping[str, Expr | Number]) -> Expr:
    """Replace variables by expressions (or numbers), rebuilding with folding."""
    replacements = {name: as_expr(value) for name, value in mapping.items()}
    if not replacements:
        return e

    def walk(node: Expr) -> Expr:
        if node.op == "var":
            return replacements.get(node.name, node)
        if node.op == "const":
            return node
        args = [walk(arg) for arg in node.args]
        return rebuild(node, args)

    return walk(e)


def rebuild(node: Expr, args: list[Expr]) -> Expr:
    op = node.op
    if op == "neg":
        return neg(args[0])
    if op in FUNCTIONS:
        return apply_function(op, args[0])
    if op == "pow":
        return power(args[0], node.args[1].value)
    return {"add": add, "sub": sub, "mul": mul, "div": div}[op](*args)


def rename(e: Expr, names: Mapping[str, str]) -> Expr:
    return substitute(e, {old: var(new) for old, new in names.items()})
