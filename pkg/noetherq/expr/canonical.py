"""
Canonical sum-of-monomials form.

Every free symbol is a polynomial variable with a (possibly negative or half-integer)
exponent; coefficients are exact fractions. A float constant enters as the fraction
of its shortest decimal text, so ``0.1`` and ``1/10`` are the same coefficient. The
non-polynomial pieces become atoms:

- ``exp(a)`` with ``a`` itself canonical; all exp factors of a monomial merge into one,
  ``exp(0)`` disappears.
- ``sin(a)`` / ``cos(a)`` with the leading coefficient of ``a`` made positive by the
  odd/even parity, ``sin(0)`` and ``cos(0)`` fold.
- ``group``: a multi-term polynomial under a negative or half-integer power. All
  integer denominators of a monomial merge into a single ``group^-1`` whose polynomial
  is expanded, stripped of its monomial content and scaled to a unit leading
  coefficient, so ``1/(2x+2y)``, ``1/(x+y)`` and ``(x+y)^-1`` share an atom and
  ``1/((1+x)^2)`` reads the same whether or not the square was expanded first. A group
  whose exponent becomes a positive integer is expanded back.

Two expressions with the same canonical form are equal wherever both are defined, so
``is_zero`` never reports a false zero. It is complete for polynomials in coordinates
and velocities with coefficients built from exp/sin/cos of linear forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import chain
from typing import Sequence

from ..exceptions import InvalidExpressionError
from .nodes import ZERO, Expr, add, const, cos, div, exp, mul, neg, power, sin, sub, var

Coeff = Fraction
Monomial = tuple[tuple["Atom", Fraction], ...]
Poly = dict[Monomial, Coeff]
FrozenPoly = tuple[tuple[Monomial, Coeff], ...]

_RANK = {"var": 0, "exp": 1, "sin": 2, "cos": 3, "group": 4}
_ONE = Fraction(1)


@dataclass(frozen=True, eq=False)
class Atom:
    kind: str  # var | exp | sin | cos | group
    name: str | None = None
    arg: FrozenPoly = ()

    @cached_property
    def key(self) -> str:
        if self.kind == "var":
            return f"{_RANK['var']}{self.name}"
        return f"{_RANK[self.kind]}{self.kind}[{_poly_key(self.arg)}]"

    @cached_property
    def symbols(self) -> frozenset[str]:
        if self.kind == "var":
            return frozenset((self.name,))
        return frozenset(
            chain.from_iterable(atom.symbols for mono, _ in self.arg for atom, _ in mono)
        )

    @property
    def poly(self) -> Poly:
        return dict(self.arg)

    @cached_property
    def reduced(self) -> bool:
        """A group that may stand alone as a denominator."""
        return self.kind == "group" and _is_reduced(self.poly)

    def __eq__(self, other):
        return isinstance(other, Atom) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


def _coeff_key(c: Coeff) -> str:
    return str(c)


def _mono_key(mono: Monomial) -> str:
    return ".".join(f"{atom.key}^{e}" for atom, e in mono)


def _poly_key(frozen: FrozenPoly) -> str:
    return "+".join(f"{_coeff_key(c)}*{_mono_key(m)}" for m, c in frozen)


def freeze(p: Poly) -> FrozenPoly:
    return tuple(sorted(p.items(), key=lambda item: _mono_key(item[0])))


def _leading(p: Poly) -> tuple[Monomial, Coeff]:
    return min(p.items(), key=lambda item: _mono_key(item[0]))


# --------------------------------------------------------------------------- #
# Polynomial arithmetic
# --------------------------------------------------------------------------- #
def _add_into(target: Poly, mono: Monomial, c: Coeff) -> None:
    result = target.get(mono, 0) + c
    if result == 0:
        target.pop(mono, None)
    else:
        target[mono] = result


def p_add(p: Poly, q: Poly) -> Poly:
    result = dict(p)
    for mono, c in q.items():
        _add_into(result, mono, c)
    return result


def p_scale(p: Poly, factor: Coeff) -> Poly:
    if factor == 0:
        return {}
    return {mono: c * factor for mono, c in p.items() if c * factor != 0}


def p_mul(p: Poly, q: Poly) -> Poly:
    result: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            for mono, c in _mono_mul(m1, m2).items():
                _add_into(result, mono, c1 * c2 * c)
    return result


def _p_pow_natural(p: Poly, n: int) -> Poly:
    result: Poly = {(): _ONE}
    base = p
    while n:
        if n & 1:
            result = p_mul(result, base)
        n >>= 1
        if n:
            base = p_mul(base, base)
    return result


def p_power(p: Poly, e: Fraction) -> Poly:
    e = Fraction(e)
    if e == 0:
        return {(): _ONE}
    if e == 1:
        return dict(p)
    if not p:
        if e > 0:
            return {}
        return {((_group(p), e),): _ONE}
    if len(p) == 1:
        ((mono, c),) = p.items()
        result = _mono_power(mono, c, e)
        if result is not None:
            return result
    elif e > 0 and e.denominator == 1:
        return _p_pow_natural(p, int(e))

    if e.denominator == 1:
        return _assemble({_group(p): e}, None, _ONE)
    return {((_group(p), e),): _ONE}


def _mono_mul(m1: Monomial, m2: Monomial) -> Poly:
    if not m1:
        return {m2: _ONE}
    if not m2:
        return {m1: _ONE}
    powers: dict[Atom, Fraction] = {}
    exp_arg: Poly | None = None
    for atom, e in chain(m1, m2):
        if atom.kind == "exp":
            exp_arg = atom.poly if exp_arg is None else p_add(exp_arg, atom.poly)
        else:
            powers[atom] = powers.get(atom, 0) + e
    return _assemble(powers, exp_arg, _ONE)


def _mono_power(mono: Monomial, c: Coeff, e: Fraction) -> Poly | None:
    exp_atoms = [atom for atom, _ in mono if atom.kind == "exp"]
    others = [(atom, x) for atom, x in mono if atom.kind != "exp"]

    if e.denominator == 1:
        k = int(e)
        exp_arg = p_scale(exp_atoms[0].poly, k) if exp_atoms else None
        return _assemble({atom: x * k for atom, x in others}, exp_arg, c**k)

    # half-integer: only where the square root splits exactly
    root = _coeff_sqrt(c)
    if root is None or len(others) > 1:
        return None
    if others and not (others[0][1].denominator == 1 and others[0][1] % 2 == 1):
        return None
    exp_arg = p_scale(exp_atoms[0].poly, e) if exp_atoms else None
    return _assemble({atom: x * e for atom, x in others}, exp_arg, root ** int(2 * e))


def _coeff_sqrt(c: Coeff) -> Coeff | None:
    if c < 0:
        return None
    num, den = math.isqrt(c.numerator), math.isqrt(c.denominator)
    if num * num == c.numerator and den * den == c.denominator:
        return Fraction(num, den)
    return None


def _assemble(powers: dict[Atom, Fraction], exp_arg: Poly | None, coeff: Coeff) -> Poly:
    atoms = []
    expansions = []
    denominators = []
    for atom, e in powers.items():
        if e == 0:
            continue
        if atom.kind == "group" and atom.arg and e.denominator == 1:
            (expansions if e > 0 else denominators).append((atom, abs(int(e))))
        else:
            atoms.append((atom, Fraction(e)))
    if exp_arg:
        atoms.append((Atom("exp", arg=freeze(exp_arg)), _ONE))
    if len(denominators) == 1 and denominators[0][1] == 1 and denominators[0][0].reduced:
        atoms.append((denominators[0][0], Fraction(-1)))
        denominators = []
    result: Poly = {tuple(sorted(atoms, key=lambda item: item[0].key)): coeff}
    for atom, n in expansions:
        result = p_mul(result, _p_pow_natural(atom.poly, n))
    if denominators:
        den: Poly = {(): _ONE}
        for atom, n in denominators:
            den = p_mul(den, _p_pow_natural(atom.poly, n))
        result = p_mul(result, _reciprocal(den))
    return result


def _content(p: Poly) -> dict[Atom, Fraction]:
    """Lowest exponent of every non-exp atom across the terms of ``p``, where nonzero."""
    atoms = {atom for mono in p for atom, _ in mono if atom.kind != "exp"}
    content = {}
    for atom in atoms:
        low = min(dict(mono).get(atom, 0) for mono in p)
        if low:
            content[atom] = low
    return content


def _is_reduced(p: Poly) -> bool:
    return len(p) > 1 and _leading(p)[1] == 1 and not _content(p)


def _shift(mono: Monomial, shift: dict[Atom, Fraction]) -> Poly:
    powers = {atom: e for atom, e in mono if atom.kind != "exp"}
    exp_arg = next((atom.poly for atom, _ in mono if atom.kind == "exp"), None)
    for atom, e in shift.items():
        powers[atom] = powers.get(atom, 0) + e
    return _assemble(powers, exp_arg, _ONE)


def _reciprocal(p: Poly) -> Poly:
    """``1/p`` for a nonzero polynomial: monomial content out, one reduced group left."""
    shift: dict[Atom, Fraction] = {}
    while len(p) > 1 and (content := _content(p)):
        step = {atom: -e for atom, e in content.items()}
        rest: Poly = {}
        for mono, c in p.items():
            for m, k in _shift(mono, step).items():
                _add_into(rest, m, c * k)
        p = rest
        for atom, e in step.items():
            shift[atom] = shift.get(atom, 0) + e
    factor = _assemble(shift, None, _ONE)
    if len(p) == 1:
        ((mono, c),) = p.items()
        return p_mul(factor, _mono_power(mono, c, Fraction(-1)))
    _, lead = _leading(p)
    group = {((_group(p_scale(p, _ONE / lead)), Fraction(-1)),): _ONE / lead}
    return p_mul(factor, group)


def _group(p: Poly) -> Atom:
    return Atom("group", arg=freeze(p))


def _var(name: str) -> Poly:
    return {((Atom("var", name=name), _ONE),): _ONE}


def _exp(p: Poly) -> Poly:
    if not p:
        return {(): _ONE}
    return {((Atom("exp", arg=freeze(p)), _ONE),): _ONE}


def _trig(kind: str, p: Poly) -> Poly:
    if not p:
        return {} if kind == "sin" else {(): _ONE}
    sign = _ONE
    _, lead = _leading(p)
    if lead < 0:
        p = p_scale(p, -1)
        if kind == "sin":
            sign = -sign
    return {((Atom(kind, arg=freeze(p)), _ONE),): sign}


# --------------------------------------------------------------------------- #
# Public API
# --------------------------------------------------------------------------- #
def canonical(e: Expr) -> Poly:
    """Canonical polynomial of an expression."""
    memo: dict[int, Poly] = {}

    def walk(node: Expr) -> Poly:
        key = id(node)
        if key not in memo:
            memo[key] = _canonical_node(node, walk)
        return memo[key]

    return walk(e)


def _exact(value: Fraction | float) -> Fraction:
    # floats read as their shortest decimal text, the way parameters are bound
    return value if isinstance(value, Fraction) else Fraction(repr(value))


def _canonical_node(node: Expr, walk) -> Poly:
    op = node.op
    if op == "const":
        return {} if node.value == 0 else {(): _exact(node.value)}
    if op == "var":
        return _var(node.name)
    a = walk(node.args[0])
    match op:
        case "neg":
            return p_scale(a, -1)
        case "add":
            return p_add(a, walk(node.args[1]))
        case "sub":
            return p_add(a, p_scale(walk(node.args[1]), -1))
        case "mul":
            return p_mul(a, walk(node.args[1]))
        case "div":
            return p_mul(a, p_power(walk(node.args[1]), Fraction(-1)))
        case "pow":
            return p_power(a, Fraction(node.args[1].value))
        case "exp":
            return _exp(a)
        case "sin" | "cos":
            return _trig(op, a)
        case "sqrt":
            return p_power(a, Fraction(1, 2))
    raise InvalidExpressionError(f"unknown node kind {op!r}")


def to_expr(p: Poly) -> Expr:
    """Rebuild an expression from a canonical polynomial, terms in canonical order."""
    result = None
    for mono, c in freeze(p):
        negative = c < 0
        term = _monomial_expr(mono, -c if negative else c)
        if result is None:
            result = neg(term) if negative else term
        else:
            result = sub(result, term) if negative else add(result, term)
    return ZERO if result is None else result


def _monomial_expr(mono: Monomial, c: Coeff) -> Expr:
    numerator, denominator = const(c.numerator), const(c.denominator)
    for atom, e in mono:
        if e > 0:
            numerator = mul(numerator, power(_atom_expr(atom), e))
        else:
            denominator = mul(denominator, power(_atom_expr(atom), -e))
    return div(numerator, denominator)


def _atom_expr(atom: Atom) -> Expr:
    match atom.kind:
        case "var":
            return var(atom.name)
        case "exp":
            return exp(to_expr(atom.poly))
        case "sin":
            return sin(to_expr(atom.poly))
        case "cos":
            return cos(to_expr(atom.poly))
    return to_expr(atom.poly)


def simplify(e: Expr) -> Expr:
    """
    Equivalent expression in canonical form.

    Constants are folded, 0/1 identities vanish and like terms are collected.
    """
    return to_expr(canonical(e))


def is_zero(e: Expr) -> bool:
    return not canonical(e)


def equivalent(a: Expr, b: Expr) -> bool:
    return is_zero(sub(a, b))


def coefficients(e: Expr, variables: Sequence[str]) -> dict[tuple, Expr]:
    """
    Split ``e`` into monomials of ``variables``.

    Returns ``{exponents: coefficient}`` where ``exponents`` lines up with
    ``variables``. Raises when one of the variables sits inside an exp, sin, cos or
    grouped denominator, where it is not a polynomial variable.
    """
    index = {name: i for i, name in enumerate(variables)}
    wanted = frozenset(variables)
    split: dict[tuple, Poly] = {}
    for mono, c in canonical(e).items():
        exponents = [0] * len(variables)
        rest = []
        for atom, x in mono:
            if atom.kind == "var" and atom.name in index:
                exponents[index[atom.name]] = int(x) if x.denominator == 1 else x
            elif atom.symbols & wanted:
                names = ", ".join(sorted(atom.symbols & wanted))
                raise InvalidExpressionError(
                    f"{names} occurs inside {atom.kind}(...), not polynomially"
                )
            else:
                rest.append((atom, x))
        _add_into(split.setdefault(tuple(exponents), {}), tuple(rest), c)
    return {
        exponents: to_expr(poly)
        for exponents, poly in sorted(split.items())
        if poly
    }
