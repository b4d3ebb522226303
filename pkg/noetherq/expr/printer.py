from fractions import Fraction

from .nodes import FUNCTIONS, Expr

_PRECEDENCE = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYMBOL = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}
_ATOM = 5


def to_text(e: Expr) -> str:
    """
    Print an expression in the parser's grammar.

    Parentheses are emitted exactly where the tree needs them, so parsing the text
    back gives a tree with the same evaluation order.
    """
    text, _ = _render(e)
    return text


def _render(e: Expr) -> tuple[str, int]:
    op = e.op
    if op == "const":
        return _number(e.value)
    if op == "var":
        return e.name, _ATOM
    if op in FUNCTIONS:
        return f"{op}({to_text(e.args[0])})", _ATOM
    if op == "neg":
        return "-" + _wrap(e.args[0], 3), 3
    if op == "pow":
        base = _wrap(e.args[0], _ATOM)
        exponent = e.args[1].value
        if exponent >= 0 and float(exponent).is_integer():
            return f"{base}^{int(exponent)}", 4
        return f"{base}^({_number(exponent)[0]})", 4
    level = _PRECEDENCE[op]
    left = _wrap(e.args[0], level)
    right = _wrap(e.args[1], level + 1)
    return f"{left}{_SYMBOL[op]}{right}", level


def _wrap(e: Expr, minimum: int) -> str:
    text, level = _render(e)
    return f"({text})" if level < minimum else text


def _number(value) -> tuple[str, int]:
    if value < 0:
        text, level = _number(-value)
        return "-" + (f"({text})" if level < 3 else text), 3
    if isinstance(value, float):
        text = repr(value)
        return text, _ATOM
    if value.denominator == 1:
        return str(value.numerator), _ATOM
    decimal = _decimal(value)
    if decimal is not None:
        return decimal, _ATOM
    return f"{value.numerator}/{value.denominator}", 2


def _decimal(value: Fraction) -> str | None:
    """Exact decimal text when the denominator only has the factors 2 and 5."""
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return None
    places = max(twos, fives)
    digits = str(value.numerator * 10**places // value.denominator).rjust(places + 1, "0")
    return f"{digits[:-places]}.{digits[-places:]}"
