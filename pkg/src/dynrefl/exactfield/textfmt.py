"""Canonical text format for polynomials and rational functions.

Grammar of the printed form::

    rational    := numerator [ " / " "(" factor { "*" factor } ")" ]
    numerator   := polynomial in expanded form, terms in descending grlex order
    factor      := "(" polynomial ")" "^" positive-integer
    term        := [ sign ] [ coeff "*" ] monomial | [ sign ] coeff
    coeff       := integer | integer "/" integer
    monomial    := var [ "^" int ] { "*" var [ "^" int ] }

The top-level ``" / "`` (slash surrounded by single spaces) separates the
numerator from the denominator, so the numerator needs no parentheses.  The
parser also accepts any ordinary arithmetic expression in ``+ - * / ^`` and
parentheses, which is convenient for writing matrix entries by hand.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import TYPE_CHECKING

from .polynomial import Polynomial, grlex_key
from .registry import VariableRegistry

if TYPE_CHECKING:
    from .rational import RationalFunction


def _format_coeff(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _format_monomial(names, e) -> str:
    parts = []
    for nm, k in zip(names, e):
        if k == 1:
            parts.append(nm)
        elif k:
            parts.append(f"{nm}^{k}")
    return "*".join(parts)


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    names = p.reg.names
    out = []
    for e, c in sorted(p.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True):
        c = Fraction(c)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        mono = _format_monomial(names, e)
        if not mono:
            body = _format_coeff(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_format_coeff(a)}*{mono}"
        if not out:
            out.append(body if sign == "+" else "-" + body)
        else:
            out.append(sign + body)
    return "".join(out)


def format_rational(r: "RationalFunction") -> str:
    if r.is_zero():
        return "0"
    num = format_polynomial(r.numerator())
    den = r.denominator_factors()
    if not den:
        return num
    body = "*".join(f"({format_polynomial(f)})^{e}" for f, e in den)
    return f"{num} / ({body})"


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        num, name, op = m.groups()
        if num is not None:
            toks.append(("num", num))
        elif name is not None:
            toks.append(("name", name))
        else:
            toks.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return toks


class _Parser:
    def __init__(self, toks, reg: VariableRegistry):
        from .rational import RationalFunction

        self.RF = RationalFunction
        self.toks = toks
        self.i = 0
        self.reg = reg

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, val=None):
        tok = self.peek()
        if tok[0] is None or (val is not None and tok[1] != val):
            raise ParseError(f"expected {val!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self):
        v = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self):
        v = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            v = v * rhs if op == "*" else v / rhs
        return v

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            sign = 1
            if self.peek() == ("op", "-"):
                self.take()
                sign = -1
            kind, val = self.take()
            if kind != "num":
                raise ParseError("exponent must be an integer literal")
            return base ** (sign * int(val))
        return base

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return self.RF.const(self.reg, int(val))
        if kind == "name":
            self.take()
            if val not in self.reg:
                raise ParseError(f"unknown variable {val!r}; registry has {self.reg.names}")
            return self.RF.var(self.reg, val)
        if (kind, val) == ("op", "("):
            self.take()
            v = self.expr()
            self.take(")")
            return v
        raise ParseError(f"unexpected token {val!r}")


def _parse_expr(text: str, reg: VariableRegistry):
    p = _Parser(_tokenize(text), reg)
    v = p.expr()
    if p.i != len(p.toks):
        raise ParseError(f"trailing input after position {p.i}: {p.toks[p.i][1]!r}")
    return v


def _split_top(text: str) -> int:
    depth = 0
    idx = -1
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and text.startswith(" / ", i):
            idx = i
    return idx


def parse_rational(text: str, reg: VariableRegistry) -> "RationalFunction":
    text = text.strip()
    if not text:
        raise ParseError("empty expression")
    k = _split_top(text)
    if k >= 0:
        num = _parse_expr(text[:k], reg)
        den = _parse_expr(text[k + 3:], reg)
        return num / den
    return _parse_expr(text, reg)


def parse_polynomial(text: str, reg: VariableRegistry) -> Polynomial:
    r = parse_rational(text, reg)
    if not r.is_polynomial():
        raise ParseError(f"{text!r} is not a polynomial")
    return r.numerator()
