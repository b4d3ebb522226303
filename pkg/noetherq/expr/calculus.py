from typing import Mapping

from .nodes import (
    ONE,
    ZERO,
    Expr,
    add,
    as_expr,
    const,
    cos,
    div,
    free_symbols,
    mul,
    neg,
    power,
    sin,
    sqrt,
    sub,
    total,
)


def diff(e: Expr, v: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to variable ``v``."""
    memo: dict[int, Expr] = {}

    def d(node: Expr) -> Expr:
        key = id(node)
        if key not in memo:
            memo[key] = _derivative(node, v, d)
        return memo[key]

    if v not in free_symbols(e):
        return ZERO
    return d(e)


def _derivative(node: Expr, v: str, d) -> Expr:
    op = node.op
    if op == "const":
        return ZERO
    if op == "var":
        return ONE if node.name == v else ZERO

    a = node.args[0]
    match op:
        case "neg":
            return neg(d(a))
        case "add":
            return add(d(a), d(node.args[1]))
        case "sub":
            return sub(d(a), d(node.args[1]))
        case "mul":
            b = node.args[1]
            return add(mul(d(a), b), mul(a, d(b)))
        case "div":
            b = node.args[1]
            da, db = d(a), d(b)
            if db.is_value(0):
                return div(da, b)
            return sub(div(da, b), div(mul(a, db), power(b, 2)))
        case "pow":
            n = node.args[1].value
            return mul(mul(const(n), power(a, n - 1)), d(a))
        case "exp":
            return mul(node, d(a))
        case "sin":
            return mul(cos(a), d(a))
        case "cos":
            return neg(mul(sin(a), d(a)))
        case "sqrt":
            return div(d(a), mul(2, sqrt(a)))
    raise AssertionError(op)


def total_derivative(
    e: Expr, rates: Mapping[str, Expr | float], explicit: str | None = None
) -> Expr:
    """
    Chain-rule derivative along a curve: sum of ``∂e/∂v * rates[v]``.

    ``explicit`` names the curve parameter itself (for example ``t``); its partial
    derivative is added with unit rate.
    """
    terms = [mul(diff(e, name), as_expr(rate)) for name, rate in rates.items()]
    if explicit is not None:
        terms.append(diff(e, explicit))
    return total(terms)


def gradient(e: Expr, names) -> list[Expr]:
    return [diff(e, name) for name in names]

