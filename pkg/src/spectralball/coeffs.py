"""Exact complex rationals (Gaussian rationals) used as polynomial coefficients."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

__all__ = ["ExactComplex", "as_exact", "ZERO", "ONE", "I"]


class ExactComplex:
    """A complex number ``re + im*i`` with arbitrary-precision rational parts.

    Instances are immutable and hashable.  ``Fraction`` keeps both parts in
    lowest terms with a positive denominator, so structural equality is
    numeric equality.
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if not isinstance(re, Fraction):
            re = Fraction(re)
        if not isinstance(im, Fraction):
            im = Fraction(im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __setattr__(self, name, value):
        raise AttributeError("ExactComplex is immutable")

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> "ExactComplex":
        obj = object.__new__(cls)
        object.__setattr__(obj, "re", re)
        object.__setattr__(obj, "im", im)
        return obj

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = as_exact(other)
        return ExactComplex._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_exact(other)
        return ExactComplex._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_exact(other) - self

    def __neg__(self):
        return ExactComplex._raw(-self.re, -self.im)

    def __mul__(self, other):
        other = as_exact(other)
        if not self.im and not other.im:
            return ExactComplex._raw(self.re * other.re, self.im)
        return ExactComplex._raw(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_exact(other)
        if not other:
            raise ZeroDivisionError("division by exact zero")
        if not other.im:
            return ExactComplex._raw(self.re / other.re, self.im / other.re)
        n = other.re * other.re + other.im * other.im
        return ExactComplex._raw(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def __rtruediv__(self, other):
        return as_exact(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers")
        if k < 0:
            return ONE / self ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "ExactComplex":
        return ExactComplex._raw(self.re, -self.im)

    # -- comparison / conversion --------------------------------------------

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, ExactComplex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Rational)):
            return not self.im and self.re == other
        if isinstance(other, complex):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    @property
    def is_real(self) -> bool:
        return not self.im

    def __repr__(self):
        return f"ExactComplex({self.re!s}, {self.im!s})"

    def __str__(self):
        return format_coefficient(self)


ZERO = ExactComplex._raw(Fraction(0), Fraction(0))
ONE = ExactComplex._raw(Fraction(1), Fraction(0))
I = ExactComplex._raw(Fraction(0), Fraction(1))


def as_exact(value) -> ExactComplex:
    """Coerce ints, Fractions and exact complexes; floats go through their
    exact binary value, so prefer ``Fraction('0.1')`` for decimal input."""
    if isinstance(value, ExactComplex):
        return value
    if isinstance(value, (int, Fraction)):
        return ExactComplex._raw(Fraction(value), Fraction(0))
    if isinstance(value, Rational):
        return ExactComplex(Fraction(value.numerator, value.denominator))
    if isinstance(value, float):
        return ExactComplex(Fraction(value))
    if isinstance(value, complex):
        return ExactComplex(Fraction(value.real), Fraction(value.imag))
    raise TypeError(f"cannot convert {type(value).__name__} to ExactComplex")


def _fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_coefficient(c: ExactComplex) -> str:
    """Render in the expression grammar: ``3/4``, ``-2*i``, ``(1/2+3*i)``."""
    if not c.im:
        return _fmt_rational(c.re)
    if not c.re:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{_fmt_rational(c.im)}*i"
    sign = "+" if c.im > 0 else "-"
    mag = abs(c.im)
    imag = "i" if mag == 1 else f"{_fmt_rational(mag)}*i"
    return f"({_fmt_rational(c.re)}{sign}{imag})"
