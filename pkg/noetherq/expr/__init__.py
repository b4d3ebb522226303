from .calculus import diff, gradient, total_derivative
from .canonical import canonical, coefficients, equivalent, is_zero, simplify, to_expr
from .evaluate import Binding, compile_expr, evaluate
from .nodes import (
    ONE,
    ZERO,
    Expr,
    add,
    as_expr,
    const,
    cos,
    div,
    exp,
    free_symbols,
    mul,
    neg,
    power,
    rename,
    sin,
    sqrt,
    sub,
    substitute,
    total,
    var,
)
from .parser import parse
from .printer import to_text

__all__ = [
    "Binding",
    "Expr",
    "ONE",
    "ZERO",
    "add",
    "as_expr",
    "canonical",
    "coefficients",
    "compile_expr",
    "const",
    "cos",
    "diff",
    "div",
    "equivalent",
    "evaluate",
    "exp",
    "free_symbols",
    "gradient",
    "is_zero",
    "mul",
    "neg",
    "parse",
    "power",
    "rename",
    "simplify",
    "sin",
    "sqrt",
    "sub",
    "substitute",
    "to_expr",
    "to_text",
    "total",
    "total_derivative",
    "var",
]
