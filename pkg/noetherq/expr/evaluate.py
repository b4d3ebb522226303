import math
from fractions import Fraction
from typing import Callable, Literal, Mapping, Sequence

import numpy as np

from ..exceptions import (
    EvaluationDivisionError,
    EvaluationDomainError,
    InvalidExpressionError,
    MissingBindingError,
)
from .nodes import Expr

Binding = Mapping[str, float]


def evaluate(e: Expr, binding: Binding) -> float:
    """
    Evaluate in IEEE double precision.

    Every free variable must be bound. Division by zero, square roots of negative
    numbers, fractional powers of negative bases and overflow raise instead of
    returning inf or nan.
    """
    memo: dict[int, float] = {}

    def walk(node: Expr) -> float:
        if id(node) in memo:
            return memo[id(node)]
        op = node.op
        if op == "const":
            result = float(node.value)
        elif op == "var":
            if node.name not in binding:
                raise MissingBindingError(node.name)
            result = float(binding[node.name])
        else:
            values = [walk(arg) for arg in node.args]
            result = _apply(op, values, node)
        memo[id(node)] = result
        return result

    return walk(e)


def _apply(op: str, values: list[float], node: Expr) -> float:
    try:
        match op:
            case "neg":
                return -values[0]
            case "add":
                return values[0] + values[1]
            case "sub":
                return values[0] - values[1]
            case "mul":
                return values[0] * values[1]
            case "div":
                if values[1] == 0:
                    raise EvaluationDivisionError("division by zero")
                return values[0] / values[1]
            case "pow":
                return _power(values[0], node.args[1].value)
            case "exp":
                return math.exp(values[0])
            case "sin":
                return math.sin(values[0])
            case "cos":
                return math.cos(values[0])
            case "sqrt":
                if values[0] < 0:
                    raise EvaluationDomainError(f"sqrt of negative value {values[0]!r}")
                return math.sqrt(values[0])
    except OverflowError as e:
        raise EvaluationDomainError(f"overflow in {op}") from e
    raise InvalidExpressionError(f"unknown node kind {op!r}")


def _power(base: float, exponent: Fraction) -> float:
    if base == 0 and exponent < 0:
        raise EvaluationDivisionError("zero raised to a negative power")
    if float(exponent).is_integer():
        result = base ** int(exponent)
    else:
        if base < 0:
            raise EvaluationDomainError(
                f"fractional power {exponent} of negative value {base!r}"
            )
        result = math.sqrt(base) ** int(2 * exponent)
    if isinstance(result, float) and math.isinf(result):
        raise OverflowError
    return result


# --------------------------------------------------------------------------- #
# Compilation to numeric closures
# --------------------------------------------------------------------------- #
_MATH_FUNCTIONS = {"exp": math.exp, "sin": math.sin, "cos": math.cos, "sqrt": math.sqrt}
_NUMPY_FUNCTIONS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt}


def compile_expr(
    e: Expr,
    names: Sequence[str],
    backend: Literal["numpy", "math"] = "numpy",
) -> Callable[..., float]:
    """
    Compile to a positional function ``f(*values)`` with arguments in ``names`` order.

    The ``numpy`` backend broadcasts over arrays and follows IEEE semantics (no
    errors, inf/nan propagate); the ``math`` backend is faster for scalars and raises
    like the standard library does.
    A constant expression returns a scalar even when the inputs are arrays.
    """
    index = {name: i for i, name in enumerate(names)}
    functions = _NUMPY_FUNCTIONS if backend == "numpy" else _MATH_FUNCTIONS
    cache: dict[int, Callable] = {}

    def build(node: Expr) -> Callable:
        if id(node) in cache:
            return cache[id(node)]
        op = node.op
        if op == "const":
            value = float(node.value)
            fn = lambda args: value  # noqa: E731
        elif op == "var":
            if node.name not in index:
                raise MissingBindingError(node.name)
            i = index[node.name]
            fn = lambda args: args[i]  # noqa: E731
        elif op == "neg":
            a = build(node.args[0])
            fn = lambda args: -a(args)  # noqa: E731
        elif op in _NUMPY_FUNCTIONS:
            a, f = build(node.args[0]), functions[op]
            fn = lambda args: f(a(args))  # noqa: E731
        elif op == "pow":
            a = build(node.args[0])
            exponent = node.args[1].value
            if float(exponent).is_integer():
                k = int(exponent)
                fn = lambda args: a(args) ** k  # noqa: E731
            else:
                k, root = int(2 * exponent), functions["sqrt"]
                fn = lambda args: root(a(args)) ** k  # noqa: E731
        else:
            a, b = build(node.args[0]), build(node.args[1])
            fn = _BINARY[op](a, b)
        cache[id(node)] = fn
        return fn

    compiled = build(e)

    def evaluate_compiled(*values):
        if len(values) != len(names):
            raise TypeError(f"expected {len(names)} values, got {len(values)}")
        if backend == "numpy":
            values = tuple(np.asarray(v, dtype=float) for v in values)
        return compiled(values)

    return evaluate_compiled


_BINARY = {
    "add": lambda a, b: lambda args: a(args) + b(args),
    "sub": lambda a, b: lambda args: a(args) - b(args),
    "mul": lambda a, b: lambda args: a(args) * b(args),
    "div": lambda a, b: lambda args: a(args) / b(args),
}
