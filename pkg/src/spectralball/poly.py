"""Exact sparse multivariate polynomials.

A :class:`Poly` is a map from exponent tuples to :class:`ExactComplex`
coefficients over a fixed :class:`Ring` of named variables.  Four rings are
used throughout the package:

``EUCLID``     entries ``x11, x12, x21, x22`` of a 2x2 matrix
``SPECTRAL``   ``x, y, s, p`` = (x11, x12, trace, det); ``y`` may carry
               negative exponents
``INVARIANT``  ``u1, u2, u3`` = (x11, x22, x12*x21)
``FIBER``      ``y, s, p`` = (x12, trace, det)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .coeffs import ONE, ZERO, ExactComplex, as_exact, format_coefficient

__all__ = [
    "Ring",
    "Poly",
    "EUCLID",
    "SPECTRAL",
    "INVARIANT",
    "FIBER",
    "RingMismatch",
    "NotPolynomial",
    "to_spectral",
    "from_spectral",
    "embed_invariant",
    "embed_fiber",
    "as_invariant",
    "euclid_trace",
    "euclid_det",
]


class RingMismatch(TypeError):
    pass


class NotPolynomial(ValueError):
    """A spectral Laurent polynomial has no Euclidean polynomial preimage."""


@dataclass(frozen=True)
class Ring:
    name: str
    variables: tuple[str, ...]
    laurent: frozenset[str] = frozenset()

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a variable of ring {self.name}") from None

    def __repr__(self):
        return f"Ring({self.name})"


EUCLID = Ring("euclid", ("x11", "x12", "x21", "x22"))
SPECTRAL = Ring("spectral", ("x", "y", "s", "p"), frozenset({"y"}))
INVARIANT = Ring("invariant", ("u1", "u2", "u3"))
FIBER = Ring("fiber", ("y", "s", "p"))


def _add_exps(a: tuple, b: tuple) -> tuple:
    return tuple(i + j for i, j in zip(a, b))


class Poly:
    """Immutable sparse polynomial in canonical form (no zero coefficients)."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping[tuple, object] | None = None):
        clean: dict[tuple, ExactComplex] = {}
        if terms:
            n = ring.nvars
            neg_ok = [v in ring.laurent for v in ring.variables]
            for exps, c in terms.items():
                exps = tuple(exps)
                if len(exps) != n:
                    raise ValueError(f"exponent {exps} has wrong length for {ring}")
                for e, ok in zip(exps, neg_ok):
                    if e < 0 and not ok:
                        raise ValueError(f"negative exponent in {exps} for {ring}")
                c = as_exact(c)
                if c:
                    clean[exps] = c
        self.ring = ring
        self.terms = clean
        self._hash = None

    @classmethod
    def _trusted(cls, ring: Ring, terms: dict) -> "Poly":
        obj = object.__new__(cls)
        obj.ring = ring
        obj.terms = terms
        obj._hash = None
        return obj

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, ring: Ring) -> "Poly":
        return cls._trusted(ring, {})

    @classmethod
    def const(cls, ring: Ring, c=1) -> "Poly":
        return cls(ring, {(0,) * ring.nvars: c})

    @classmethod
    def var(cls, ring: Ring, name: str, power: int = 1) -> "Poly":
        exps = [0] * ring.nvars
        exps[ring.index(name)] = power
        return cls(ring, {tuple(exps): ONE})

    @classmethod
    def monomial(cls, ring: Ring, exps: Iterable[int], c=1) -> "Poly":
        return cls(ring, {tuple(exps): c})

    # -- structure ---------------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or set(self.terms) == {(0,) * self.ring.nvars}

    def constant_term(self) -> ExactComplex:
        return self.terms.get((0,) * self.ring.nvars, ZERO)

    def coeff(self, exps: Iterable[int]) -> ExactComplex:
        return self.terms.get(tuple(exps), ZERO)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        i = self.ring.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def min_degree_in(self, name: str) -> int:
        i = self.ring.index(name)
        return min((e[i] for e in self.terms), default=0)

    def __len__(self):
        return len(self.terms)

    def sorted_terms(self) -> list[tuple[tuple, ExactComplex]]:
        """Graded lexicographic order, highest first."""
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Poly"):
        if self.ring != other.ring:
            raise RingMismatch(f"{self.ring.name} vs {other.ring.name}")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.ring, other)

    def __add__(self, other):
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for e, c in small.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly._trusted(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._trusted(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "Poly":
        c = as_exact(c)
        if not c:
            return Poly.zero(self.ring)
        return Poly._trusted(self.ring, {e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[tuple, ExactComplex] = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = _add_exps(ea, eb)
                v = get(e)
                out[e] = ca * cb if v is None else v + ca * cb
        return Poly._trusted(self.ring, {e: c for e, c in out.items() if c})

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, Poly):
            if not other.is_constant() or other.is_zero:
                raise ZeroDivisionError("only division by a nonzero constant is supported")
            other = other.constant_term()
        return self.scale(ONE / as_exact(other))

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers")
        if k < 0:
            mono = self._as_monomial()
            if mono is None:
                raise NotPolynomial("negative power of a non-monomial")
            e, c = mono
            return Poly(self.ring, {tuple(i * k for i in e): ONE / c ** (-k)})
        result = Poly.const(self.ring, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def _as_monomial(self):
        if len(self.terms) != 1:
            return None
        ((e, c),) = self.terms.items()
        return e, c

    def diff(self, name: str) -> "Poly":
        """Formal partial derivative."""
        i = self.ring.index(name)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = c * k
        return Poly._trusted(self.ring, out)

    def subs(self, images: Mapping[str, "Poly"], target: Ring) -> "Poly":
        """Ring homomorphism sending each variable to ``images[name]``.

        Variables without an image must also exist in ``target`` and map to
        themselves.  Negative exponents require a monomial image.
        """
        gens = []
        for v in self.ring.variables:
            img = images.get(v)
            if img is None:
                img = Poly.var(target, v)
            elif img.ring != target:
                raise RingMismatch(f"image of {v} lies in {img.ring.name}, not {target.name}")
            gens.append(img)
        cache: dict[tuple[int, int], Poly] = {}

        def power(i: int, k: int) -> Poly:
            key = (i, k)
            if key not in cache:
                cache[key] = gens[i] ** k
            return cache[key]

        acc: dict[tuple, ExactComplex] = {}
        for e, c in self.terms.items():
            term = None
            for i, k in enumerate(e):
                if k:
                    f = power(i, k)
                    term = f if term is None else term * f
            if term is None:
                term = Poly.const(target, 1)
            for te, tc in term.terms.items():
                v = acc.get(te)
                acc[te] = tc * c if v is None else v + tc * c
        return Poly._trusted(target, {e: c for e, c in acc.items() if c})

    def relabel(self, target: Ring) -> "Poly":
        """Reinterpret the same exponent tuples in a ring of equal arity."""
        if target.nvars != self.ring.nvars:
            raise RingMismatch("arity differs")
        return Poly(target, self.terms)

    # -- numeric evaluation ------------------------------------------------

    def evaluate(self, values):
        """Evaluate at a point.  ``values`` is a mapping from variable name to
        a number or numpy array, or a sequence in ring order.  Integer,
        Fraction and ExactComplex inputs give an exact ExactComplex result;
        anything else is evaluated in complex floating point."""
        if isinstance(values, Mapping):
            vals = [values[v] for v in self.ring.variables]
        else:
            vals = list(values)
        exact = all(isinstance(v, (int, Fraction, ExactComplex)) for v in vals)
        if exact:
            vals = [as_exact(v) for v in vals]
        total = ZERO if exact else 0
        powers: dict[tuple[int, int], object] = {}
        for e, c in self.terms.items():
            term = c if exact else complex(c)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    pw = powers.get(key)
                    if pw is None:
                        pw = powers[key] = vals[i] ** k
                    term = term * pw
            total = total + term
        return total

    # -- identity ----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ring == other.ring and self.terms == other.terms
        if isinstance(other, (int, ExactComplex)) or hasattr(other, "denominator"):
            c = as_exact(other)
            return self.terms == ({(0,) * self.ring.nvars: c} if c else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self.terms.items())))
        return self._hash

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly[{self.ring.name}]({format_poly(self)})"


def _format_monomial(ring: Ring, exps: tuple) -> str:
    parts = []
    for name, k in zip(ring.variables, exps):
        if k == 1:
            parts.append(name)
        elif k:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def format_poly(q: Poly) -> str:
    """Canonical text in the expression grammar (graded lex, highest first)."""
    if not q.terms:
        return "0"
    out = []
    for exps, c in q.sorted_terms():
        mono = _format_monomial(q.ring, exps)
        negative = c.is_real and c.re < 0
        mag = -c if negative else c
        if not mono:
            body = format_coefficient(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{format_coefficient(mag)}*{mono}"
        if not out:
            out.append(f"-{body}" if negative else body)
        else:
            out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)


# -- chart conversions -------------------------------------------------------

def _v(ring: Ring, name: str) -> Poly:
    return Poly.var(ring, name)


@lru_cache(maxsize=None)
def _spectral_images() -> dict[str, Poly]:
    x, y, s, p = (_v(SPECTRAL, n) for n in SPECTRAL.variables)
    return {
        "x11": x,
        "x12": y,
        "x21": (x * s - x * x - p) * Poly.var(SPECTRAL, "y", -1),
        "x22": s - x,
    }


@lru_cache(maxsize=None)
def _spectral_power(var: str, k: int) -> Poly:
    return _spectral_images()[var] ** k


def euclid_trace() -> Poly:
    return _v(EUCLID, "x11") + _v(EUCLID, "x22")


def euclid_det() -> Poly:
    return _v(EUCLID, "x11") * _v(EUCLID, "x22") - _v(EUCLID, "x12") * _v(EUCLID, "x21")


@lru_cache(maxsize=65536)
def _spectral_monomial(e: tuple) -> Poly:
    term = Poly.const(SPECTRAL, 1)
    for name, k in zip(EUCLID.variables, e):
        if k:
            term = term * _spectral_power(name, k)
    return term


def to_spectral(q: Poly) -> Poly:
    """Rewrite a Euclidean polynomial in (x, y, s, p)."""
    if q.ring != EUCLID:
        raise RingMismatch(f"to_spectral expects euclid, got {q.ring.name}")
    acc: dict[tuple, ExactComplex] = {}
    for e, c in q.terms.items():
        for te, tc in _spectral_monomial(e).terms.items():
            v = acc.get(te)
            acc[te] = tc * c if v is None else v + tc * c
    return Poly._trusted(SPECTRAL, {e: c for e, c in acc.items() if c})


@lru_cache(maxsize=None)
def _euclid_images() -> dict[str, Poly]:
    return {
        "x": _v(EUCLID, "x11"),
        "y": _v(EUCLID, "x12"),
        "s": euclid_trace(),
        "p": euclid_det(),
    }


def from_spectral(q: Poly, verify: bool = False) -> Poly:
    """Inverse chart.  Raises :class:`NotPolynomial` when negative powers of
    ``y`` do not cancel."""
    if q.ring != SPECTRAL:
        raise RingMismatch(f"from_spectral expects spectral, got {q.ring.name}")
    iy = SPECTRAL.index("y")
    shift = max(0, -q.min_degree_in("y"))
    lifted = {}
    for e, c in q.terms.items():
        ne = list(e)
        ne[iy] += shift
        lifted[tuple(ne)] = c
    expanded = Poly._trusted(SPECTRAL, lifted).subs(_euclid_images(), EUCLID)
    i12 = EUCLID.index("x12")
    out = {}
    for e, c in expanded.terms.items():
        if e[i12] < shift:
            raise NotPolynomial(f"{format_poly(q)} has no Euclidean polynomial preimage")
        ne = list(e)
        ne[i12] -= shift
        out[tuple(ne)] = c
    result = Poly._trusted(EUCLID, out)
    if verify and to_spectral(result) != q:
        raise NotPolynomial("round trip through the spectral chart did not close")
    return result


@lru_cache(maxsize=None)
def _invariant_images(target: str) -> dict[str, Poly]:
    if target == "euclid":
        x11, x12, x21, x22 = (_v(EUCLID, n) for n in EUCLID.variables)
        return {"u1": x11, "u2": x22, "u3": x12 * x21}
    if target == "spectral":
        x, s, p = _v(SPECTRAL, "x"), _v(SPECTRAL, "s"), _v(SPECTRAL, "p")
        return {"u1": x, "u2": s - x, "u3": x * (s - x) - p}
    raise ValueError(f"unknown target {target!r}")


def embed_invariant(a: Poly, target: str = "euclid") -> Poly:
    """Map u1, u2, u3 to x11, x22, x12*x21 (or their spectral images)."""
    if a.ring != INVARIANT:
        raise RingMismatch(f"expected invariant poly, got {a.ring.name}")
    ring = EUCLID if target == "euclid" else SPECTRAL
    return a.subs(_invariant_images(target), ring)


@lru_cache(maxsize=None)
def _fiber_images(transposed: bool) -> dict[str, Poly]:
    y = _v(EUCLID, "x21" if transposed else "x12")
    return {"y": y, "s": euclid_trace(), "p": euclid_det()}


def embed_fiber(b: Poly, target: str = "euclid", transposed: bool = False) -> Poly:
    """Evaluate a payload b(y, s, p) at (x12, tr, det), or at (x21, tr, det)
    for the transposition-conjugated families."""
    if b.ring != FIBER:
        raise RingMismatch(f"expected fiber poly, got {b.ring.name}")
    e = b.subs(_fiber_images(transposed), EUCLID)
    return e if target == "euclid" else to_spectral(e)


def as_invariant(q: Poly) -> Poly | None:
    """Express a balanced Euclidean polynomial in u1, u2, u3 (None if some
    monomial has unequal x12 and x21 exponents)."""
    if q.ring != EUCLID:
        raise RingMismatch(f"expected euclid poly, got {q.ring.name}")
    out = {}
    for (a, b, c, d), coef in q.terms.items():
        if b != c:
            return None
        out[(a, d, b)] = coef
    return Poly._trusted(INVARIANT, out)
