"""Recursive-descent parser for shift-operator expressions.

Grammar (power binds tighter than product, product tighter than sum)::

    sum     := product (('+' | '-') product)*
    product := unary (('·' | '.' | '*' | <juxtaposition>) unary)*
    unary   := '-' unary | power
    power   := postfix ('^' INTEGER)?
    postfix := atom ('*')*          # '*' glued to U, I or ')' is the adjoint
    atom    := NUMBER ['i' | 'j'] | 'U' | 'I' | '(' sum ')'

So ``U*`` is the adjoint, ``2U`` and ``U* U`` are products, and ``U * U``
(spaced) is a product too.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InputError
from .qtop import IDENTITY, SHIFT, QuasiToeplitzOperator, qt_adjoint, qt_multiply

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)(?P<imag>[ij])?|(?P<op>[UI()+\-*·.^=]))")


class ExpressionError(InputError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass
class _Tok:
    kind: str  # 'num', 'op', 'end'
    text: str
    pos: int
    glued: bool  # no whitespace before this token
    value: complex = 0j


def tokenize(text: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise ExpressionError(f"unexpected character {text[i]!r}", i)
        start = m.start(m.lastgroup if m.lastgroup != "imag" else "num")
        glued = start > 0 and not text[start - 1].isspace()
        if m.group("num") is not None:
            value = float(m.group("num"))
            toks.append(_Tok("num", m.group(0).strip(), start, glued,
                             complex(0, value) if m.group("imag") else complex(value)))
        else:
            toks.append(_Tok("op", m.group("op"), start, glued))
        i = m.end()
    toks.append(_Tok("end", "", len(text), False))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        if self.tok.text != text:
            raise ExpressionError(f"expected {text!r}, found {self.tok.text or 'end of input'!r}", self.tok.pos)
        return self.take()

    def parse(self) -> QuasiToeplitzOperator:
        value = self.sum()
        if self.tok.kind != "end":
            raise ExpressionError(f"unexpected {self.tok.text!r}", self.tok.pos)
        return value

    def sum(self):
        value = self.product()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            rhs = self.product()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _starts_atom(self, t):
        return t.kind == "num" or t.text in ("U", "I", "(")

    def product(self):
        value = self.unary()
        while True:
            t = self.tok
            if t.text in ("·", ".", "*"):
                self.take()
                value = qt_multiply(value, self.unary())
            elif self._starts_atom(t):
                value = qt_multiply(value, self.unary())
            else:
                return value

    def unary(self):
        if self.tok.text == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        base = self.postfix()
        if self.tok.text == "^":
            self.take()
            t = self.take()
            if t.kind != "num" or t.value.imag or t.value.real != int(t.value.real):
                raise ExpressionError("exponent must be a nonnegative integer", t.pos)
            return base ** int(t.value.real)
        return base

    def postfix(self):
        value = self.atom()
        while (self.tok.text == "*" and self.tok.glued
               and self.toks[self.i - 1].text in ("U", "I", ")", "*")):
            self.take()
            value = qt_adjoint(value)
        return value

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            return QuasiToeplitzOperator({0: t.value})
        if t.text == "U":
            self.take()
            return SHIFT
        if t.text == "I":
            self.take()
            return IDENTITY
        if t.text == "(":
            self.take()
            value = self.sum()
            self.expect(")")
            return value
        raise ExpressionError(f"expected an operand, found {t.text or 'end of input'!r}", t.pos)


def parse_expression(text: str) -> QuasiToeplitzOperator:
    """Evaluate an operator expression over ``U``, ``U*``, ``I`` and complex scalars."""
    return _Parser(text).parse()


def parse_identity(text: str):
    """Split ``"LHS = RHS"`` and evaluate both sides."""
    if text.count("=") != 1:
        raise ExpressionError("identity must contain exactly one '='", text.find("=") if "=" in text else len(text))
    lhs, rhs = text.split("=")
    try:
        left = parse_expression(lhs)
    except ExpressionError as exc:
        raise ExpressionError(str(exc).rsplit(" at position", 1)[0], exc.position) from None
    offset = len(lhs) + 1
    try:
        right = parse_expression(rhs)
    except ExpressionError as exc:
        raise ExpressionError(str(exc).rsplit(" at position", 1)[0], exc.position + offset) from None
    return left, right
