"""Tiny polynomial expressions in x, y, z for analytic test fields.

Grammar: ``+ - * ^`` over the variables and rational literals
(integers, decimals, or ``p/q`` fractions).  Parsing tracks the total
polynomial degree so callers can check it against an element's degree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FieldSyntaxError

__all__ = ["FieldExpr", "parse_field"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<var>[xyz])|(?P<op>[-+*^()/]))"
)


@dataclass(frozen=True)
class FieldExpr:
    """A parsed field: callable on a coordinate sequence, with known degree."""

    source: str
    degree: int
    _fn: object

    def __call__(self, point) -> float:
        x = float(point[0])
        y = float(point[1]) if len(point) > 1 else 0.0
        z = float(point[2]) if len(point) > 2 else 0.0
        return self._fn(x, y, z)


def _tokenize(text: str):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise FieldSyntaxError(f"unexpected character {text[pos:].strip()[0]!r}")
            break
        pos = m.end()
        if m.group("num"):
            out.append(("num", m.group("num")))
        elif m.group("var"):
            out.append(("var", m.group("var")))
        else:
            out.append(("op", m.group("op")))
    return out


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise FieldSyntaxError(f"expected {op!r}, found {val!r}")

    # Each rule returns (eval_fn(x, y, z) -> float, degree).

    def expr(self):
        fn, deg = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rfn, rdeg = self.term()
            if op == "+":
                fn = (lambda a, b: lambda x, y, z: a(x, y, z) + b(x, y, z))(fn, rfn)
            else:
                fn = (lambda a, b: lambda x, y, z: a(x, y, z) - b(x, y, z))(fn, rfn)
            deg = max(deg, rdeg)
        return fn, deg

    def term(self):
        fn, deg = self.unary()
        while self.peek() == ("op", "*"):
            self.take()
            rfn, rdeg = self.unary()
            fn = (lambda a, b: lambda x, y, z: a(x, y, z) * b(x, y, z))(fn, rfn)
            deg += rdeg
        return fn, deg

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            fn, deg = self.unary()
            return (lambda a: lambda x, y, z: -a(x, y, z))(fn), deg
        return self.power()

    def power(self):
        fn, deg = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num" or "." in val:
                raise FieldSyntaxError("exponent must be a plain integer")
            n = int(val)
            fn = (lambda a, k: lambda x, y, z: a(x, y, z) ** k)(fn, n)
            deg *= n
        return fn, deg

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            value = float(val)
            if self.peek() == ("op", "/"):
                self.take()
                kind2, val2 = self.take()
                if kind2 != "num":
                    raise FieldSyntaxError("fraction needs a numeric denominator")
                value = value / float(val2)
            return (lambda c: lambda x, y, z: c)(value), 0
        if kind == "var":
            idx = "xyz".index(val)
            return (lambda i: lambda x, y, z: (x, y, z)[i])(idx), 1
        if kind == "op" and val == "(":
            fn, deg = self.expr()
            self.expect_op(")")
            return fn, deg
        raise FieldSyntaxError(f"unexpected token {val!r}")


def parse_field(text: str) -> FieldExpr:
    tokens = _tokenize(text)
    if not tokens:
        raise FieldSyntaxError("empty field expression")
    parser = _Parser(tokens)
    fn, deg = parser.expr()
    if parser.pos != len(tokens):
        raise FieldSyntaxError(f"trailing input near {parser.peek()[1]!r}")
    return FieldExpr(source=text, degree=deg, _fn=fn)
