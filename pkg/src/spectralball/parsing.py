"""Recursive-descent parser for polynomial expressions.

Grammar::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := ('-' | '+') unary | power
    power    := atom ('^' exponent)?
    exponent := ['-'] INT | '(' ['-'] INT ')'
    atom     := NUMBER | VARIABLE | 'i' | '(' expr ')'

Numbers are exact (``3/4`` parses as a quotient, ``0.25`` as 1/4).  ``/``
only accepts a nonzero constant on the right.  Negative exponents are only
legal where the result is still a Laurent monomial of the ring.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .coeffs import I
from .poly import EUCLID, FIBER, INVARIANT, SPECTRAL, NotPolynomial, Poly, Ring

__all__ = ["ParseError", "parse_poly", "infer_ring", "RINGS"]

RINGS = {r.name: r for r in (EUCLID, SPECTRAL, INVARIANT, FIBER)}


class ParseError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            break
        num, name, sym = m.groups()
        if num is not None:
            tokens.append(("num", num))
        elif name is not None:
            tokens.append(("name", name))
        else:
            if sym not in "+-*/^()":
                raise ParseError(f"unexpected character {sym!r} at {m.start(3)}")
            tokens.append(("op", sym))
        pos = m.end()
    return tokens


def infer_ring(text: str) -> Ring:
    """Pick the ring whose variables cover every identifier in ``text``.

    ``y``/``s``/``p`` alone resolve to the spectral ring; ask for the fiber
    ring explicitly when that is meant.
    """
    names = {v for kind, v in _tokenize(text) if kind == "name" and v != "i"}
    for ring in (EUCLID, SPECTRAL, INVARIANT):
        if names <= set(ring.variables):
            return ring
    raise ParseError(f"variables {sorted(names)} do not belong to a single ring")


class _Parser:
    def __init__(self, text: str, ring: Ring):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.ring = ring

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, v = self.take()
        if v != value:
            raise ParseError(f"expected {value!r}, found {v!r}")

    def parse(self) -> Poly:
        if not self.tokens:
            raise ParseError("empty expression")
        result = self.expr()
        if self.pos != len(self.tokens):
            raise ParseError(f"trailing input at token {self.peek()[1]!r}")
        return result

    def expr(self) -> Poly:
        acc = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self) -> Poly:
        acc = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            _, op = self.take()
            rhs = self.unary()
            if op == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant() or rhs.is_zero:
                    raise ParseError("division only by a nonzero constant")
                acc = acc / rhs
        return acc

    def unary(self) -> Poly:
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            k = self.exponent()
            try:
                return base ** k
            except (NotPolynomial, ValueError) as exc:
                raise ParseError(f"invalid power {k}: {exc}") from None
        return base

    def exponent(self) -> int:
        paren = self.peek() == ("op", "(")
        if paren:
            self.take()
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        kind, v = self.take()
        if kind != "num" or not v.isdigit():
            raise ParseError(f"exponent must be an integer, found {v!r}")
        if paren:
            self.expect(")")
        return sign * int(v)

    def atom(self) -> Poly:
        kind, v = self.take()
        if kind == "num":
            return Poly.const(self.ring, Fraction(v))
        if kind == "name":
            if v == "i":
                return Poly.const(self.ring, I)
            if v not in self.ring.variables:
                raise ParseError(f"unknown variable {v!r} for ring {self.ring.name}")
            return Poly.var(self.ring, v)
        if (kind, v) == ("op", "("):
            inner = self.expr()
            self.expect(")")
            return inner
        if kind is None:
            raise ParseError("unexpected end of input")
        raise ParseError(f"unexpected token {v!r}")


def parse_poly(text: str, ring: Ring | str | None = None) -> Poly:
    """Parse ``text`` into a polynomial over ``ring`` (inferred if omitted)."""
    if isinstance(ring, str):
        ring = RINGS[ring]
    if ring is None:
        ring = infer_ring(text)
    return _Parser(text, ring).parse()
