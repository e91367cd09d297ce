"""Marked-point expressions: rational functions of t over the rationals.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("+" | "-") unary | power
    power  := atom ("^" INT)?
    atom   := INT | "t" | "(" expr ")"

Values are kept as (numerator, denominator) pairs of Fraction coefficient
lists, lowest degree first, and normalized once at the end.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .core import MarkedPoint

MAX_EXPONENT = 256

_TOKEN = re.compile(r"\s*(?:(\d+)|(t)|([-+*/^()]))")


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str):
        super().__init__(f"syntax error at position {position}: {message}\n  {text}\n  {' ' * position}^")
        self.position = position
        self.reason = message


@dataclass(frozen=True)
class _Tok:
    kind: str  # int | t | op | end
    text: str
    pos: int


def _tokens(text: str) -> list[_Tok]:
    out = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise ParseError(f"unexpected character {text[i]!r}", i, text)
        start = m.start(m.lastindex)
        kind = ("int", "t", "op")[m.lastindex - 1]
        out.append(_Tok(kind, m.group(m.lastindex), start))
        i = m.end()
    out.append(_Tok("end", "", len(text)))
    return out


# -- polynomial arithmetic on Fraction lists ----------------------------------

def _trim(p: list[Fraction]) -> list[Fraction]:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _add(a, b):
    n = max(len(a), len(b))
    return _trim([(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(n)])


def _mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _neg(a):
    return [-x for x in a]


def _is_zero(a) -> bool:
    return not any(a)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.cur
        raise ParseError(msg, tok.pos, self.text)

    def take(self, op: str | None = None) -> _Tok:
        tok = self.cur
        if op is not None and not (tok.kind == "op" and tok.text == op):
            self.fail(f"expected {op!r}" + (" before end of input" if tok.kind == "end" else f", found {tok.text!r}"))
        self.i += 1
        return tok

    def at(self, *ops: str) -> bool:
        return self.cur.kind == "op" and self.cur.text in ops

    def parse(self):
        if self.cur.kind == "end":
            self.fail("empty expression")
        val = self.expr()
        if self.cur.kind != "end":
            self.fail(f"unexpected {self.cur.text!r}")
        return val

    def expr(self):
        n, d = self.term()
        while self.at("+", "-"):
            sign = self.take().text
            n2, d2 = self.term()
            if sign == "-":
                n2 = _neg(n2)
            n, d = _add(_mul(n, d2), _mul(n2, d)), _mul(d, d2)
        return n, d

    def term(self):
        n, d = self.unary()
        while self.at("*", "/"):
            op = self.take()
            n2, d2 = self.unary()
            if op.text == "*":
                n, d = _mul(n, n2), _mul(d, d2)
            else:
                if _is_zero(n2):
                    self.fail("division by zero", op)
                n, d = _mul(n, d2), _mul(d, n2)
        return n, d

    def unary(self):
        if self.at("-"):
            self.take()
            n, d = self.unary()
            return _neg(n), d
        if self.at("+"):
            self.take()
        return self.power()

    def power(self):
        n, d = self.atom()
        if self.at("^"):
            self.take()
            tok = self.cur
            if tok.kind != "int":
                self.fail("exponent must be a nonnegative integer literal")
            self.take()
            k = int(tok.text)
            if k > MAX_EXPONENT:
                self.fail(f"exponent larger than {MAX_EXPONENT}", tok)
            rn, rd = [Fraction(1)], [Fraction(1)]
            for _ in range(k):
                rn, rd = _mul(rn, n), _mul(rd, d)
            n, d = rn, rd
            if self.at("^"):
                self.fail("chained exponents need parentheses")
        return n, d

    def atom(self):
        tok = self.cur
        if tok.kind == "int":
            self.take()
            return [Fraction(int(tok.text))], [Fraction(1)]
        if tok.kind == "t":
            self.take()
            return [Fraction(0), Fraction(1)], [Fraction(1)]
        if self.at("("):
            self.take()
            val = self.expr()
            self.take(")")
            return val
        if tok.kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected {tok.text!r}")


def parse_rational_function(text: str) -> tuple[list[Fraction], list[Fraction]]:
    """Numerator and denominator coefficient lists (lowest degree first), unreduced."""
    return _Parser(text).parse()


def parse_marked_point(text: str) -> MarkedPoint:
    """Parse and normalize; raises ParseError or InadmissiblePoint."""
    n, d = parse_rational_function(text)
    return MarkedPoint.from_rational_lists(n, d)


def format_marked_point(c: MarkedPoint) -> str:
    return str(c)
