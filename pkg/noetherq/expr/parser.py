"""
Recursive-descent parser for the expression grammar.

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := base ('^' unary)?
    base     := number | ident | func '(' expr ')' | '(' expr ')'
    func     := 'exp' | 'sin' | 'cos' | 'sqrt'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2`` is
``-(x^2)`` and ``a^b^c`` is ``a^(b^c)``. Exponents must reduce to an integer or
half-integer constant. Numeric literals are kept as exact fractions.
"""

import re
from dataclasses import dataclass
from fractions import Fraction

from ..exceptions import ExprSyntaxError, UnknownFunctionError
from .nodes import FUNCTIONS, Expr, is_half_integer

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # number | ident | op | end
    text: str
    offset: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    position = 0
    while True:
        while position < len(source) and source[position].isspace():
            position += 1
        if position >= len(source):
            break
        match = _TOKEN.match(source, position)
        if match is None or match.lastgroup is None:
            raise ExprSyntaxError(
                f"unexpected character {source[position]!r}",
                _byte_offset(source, position),
                source,
            )
        start = match.start(match.lastgroup)
        tokens.append(Token(match.lastgroup, match.group(match.lastgroup), start))
        position = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


def parse(source: str) -> Expr:
    """Parse infix text into an expression tree."""
    return _Parser(source).parse()


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.index = 0

    # token helpers
    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def at(self, text: str) -> bool:
        return self.current.kind == "op" and self.current.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, message: str, token: Token | None = None):
        token = token or self.current
        found = "end of input" if token.kind == "end" else repr(token.text)
        raise ExprSyntaxError(
            f"{message}, found {found}",
            _byte_offset(self.source, token.offset),
            self.source,
        )

    # grammar
    def parse(self) -> Expr:
        if self.current.kind == "end":
            self.fail("empty expression")
        tree = self.expr()
        if self.current.kind != "end":
            self.fail("unexpected trailing input")
        return tree

    def expr(self) -> Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            op = "add" if self.advance().text == "+" else "sub"
            left = Expr(op, (left, self.term()))
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.at("*") or self.at("/"):
            op = "mul" if self.advance().text == "*" else "div"
            left = Expr(op, (left, self.unary()))
        return left

    def unary(self) -> Expr:
        if self.at("-"):
            self.advance()
            return Expr("neg", (self.unary(),))
        return self.power()

    def power(self) -> Expr:
        base = self.base()
        if not self.at("^"):
            return base
        self.advance()
        start = self.current
        exponent = _constant_value(self.unary())
        if exponent is None or not is_half_integer(exponent):
            self.fail("exponent must be an integer or half-integer constant", start)
        if isinstance(exponent, float):
            exponent = Fraction(exponent)
        return Expr("pow", (base, Expr("const", value=exponent)))

    def base(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Expr("const", value=Fraction(token.text))
        if token.kind == "ident":
            self.advance()
            if self.at("("):
                if token.text not in FUNCTIONS:
                    raise UnknownFunctionError(
                        token.text, _byte_offset(self.source, token.offset), self.source
                    )
                self.advance()
                argument = self.expr()
                self.expect(")")
                return Expr(token.text, (argument,))
            if token.text in FUNCTIONS:
                self.fail(f"expected '(' after function {token.text!r}")
            return Expr("var", name=token.text)
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        self.fail("expected a number, name or '('")


def _constant_value(e: Expr):
    """Exact value of a variable-free arithmetic subtree, or None."""
    if e.op == "const":
        return e.value
    values = [_constant_value(arg) for arg in e.args]
    if e.op == "var" or any(v is None for v in values):
        return None
    match e.op:
        case "neg":
            return -values[0]
        case "add":
            return values[0] + values[1]
        case "sub":
            return values[0] - values[1]
        case "mul":
            return values[0] * values[1]
        case "div":
            return values[0] / values[1] if values[1] != 0 else None
        case "pow":
            if values[0] == 0 and values[1] < 0:
                return None
            if float(values[1]).is_integer():
                return values[0] ** int(values[1])
    return None
