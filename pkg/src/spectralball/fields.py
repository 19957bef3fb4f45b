"""Polynomial vector fields on the space of 2x2 complex matrices.

A field is written ``v1 d/dx11 + v2 d/dx12 + v3 d/dx21 + v4 d/dx22`` with
Euclidean polynomial components.  The Lie bracket follows the derivation
convention ``[V, W](q) = V(W(q)) - W(V(q))``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache

from .parsing import ParseError, parse_poly
from .poly import (
    EUCLID,
    FIBER,
    INVARIANT,
    SPECTRAL,
    Poly,
    RingMismatch,
    embed_fiber,
    embed_invariant,
    euclid_det,
    euclid_trace,
    to_spectral,
)

__all__ = [
    "VectorField",
    "SpectralField",
    "GeneratorTerm",
    "ChartError",
    "GENERATOR_KINDS",
    "apply",
    "lie_bracket",
    "divergence",
    "make_generator",
    "transpose_poly",
    "parse_field",
]

COMPONENTS = ("x11", "x12", "x21", "x22")
_LABELS = ("d11", "d12", "d21", "d22")


class ChartError(ValueError):
    """Spectral-chart operation requested for a field that is not orthogonal
    to trace and determinant."""


def _zero() -> Poly:
    return Poly.zero(EUCLID)


def transpose_poly(q: Poly) -> Poly:
    """Precompose with x -> x^t (swap x12 and x21)."""
    return Poly._trusted(EUCLID, {(a, c, b, d): coef for (a, b, c, d), coef in q.terms.items()})


class VectorField:
    __slots__ = ("comps", "__dict__")

    def __init__(self, v1=None, v2=None, v3=None, v4=None):
        comps = []
        for v in (v1, v2, v3, v4):
            if v is None:
                v = _zero()
            elif v.ring != EUCLID:
                raise RingMismatch(f"field components must be euclid, got {v.ring.name}")
            comps.append(v)
        self.comps: tuple[Poly, Poly, Poly, Poly] = tuple(comps)

    @classmethod
    def zero(cls) -> "VectorField":
        return cls()

    v1 = property(lambda self: self.comps[0])
    v2 = property(lambda self: self.comps[1])
    v3 = property(lambda self: self.comps[2])
    v4 = property(lambda self: self.comps[3])

    def __iter__(self):
        return iter(self.comps)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(*(a - b for a, b in zip(self.comps, other.comps)))

    def __neg__(self) -> "VectorField":
        return VectorField(*(-a for a in self.comps))

    def scale(self, c) -> "VectorField":
        return VectorField(*(a.scale(c) for a in self.comps))

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.comps == other.comps

    def __hash__(self):
        return hash(self.comps)

    def __bool__(self):
        return any(self.comps)

    @property
    def is_zero(self) -> bool:
        return not any(self.comps)

    def degree(self) -> int:
        return max(c.degree() for c in self.comps)

    def transpose(self) -> "VectorField":
        """Push forward by the transposition: tau_* V = tau o V o tau."""
        v1, v2, v3, v4 = (transpose_poly(c) for c in self.comps)
        return VectorField(v1, v3, v2, v4)

    @cached_property
    def is_orthogonal(self) -> bool:
        """True iff the field annihilates trace and determinant exactly."""
        return apply(self, euclid_trace()).is_zero and apply(self, euclid_det()).is_zero

    def spectral(self) -> "SpectralField":
        if not self.is_orthogonal:
            raise ChartError("spectral form needs a field orthogonal to tr and det")
        return self._spectral

    @cached_property
    def _spectral(self) -> "SpectralField":
        return SpectralField(to_spectral(self.v1), to_spectral(self.v2))

    def evaluate(self, m):
        """Numeric value at a matrix (or an array of shape (..., 2, 2))."""
        import numpy as np

        m = np.asarray(m, dtype=complex)
        vals = (m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1])
        out = np.empty_like(m)
        for k, (i, j) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
            out[..., i, j] = self.comps[k].evaluate(vals) if self.comps[k] else 0
        return out

    def __str__(self):
        return format_field(self)

    def __repr__(self):
        return f"VectorField({format_field(self)})"


@dataclass(frozen=True)
class SpectralField:
    """``P d/dx + Q d/dy`` in spectral coordinates (x, y, s, p)."""

    P: Poly
    Q: Poly

    def divergence(self) -> Poly:
        y_inv = Poly.var(SPECTRAL, "y", -1)
        return self.P.diff("x") + self.Q.diff("y") - self.Q * y_inv


def apply(V: VectorField, q: Poly) -> Poly:
    """The derivation V applied to a Euclidean polynomial."""
    acc = _zero()
    for v, name in zip(V.comps, COMPONENTS):
        if v:
            d = q.diff(name)
            if d:
                acc = acc + v * d
    return acc


def lie_bracket(V: VectorField, W: VectorField) -> VectorField:
    """Component i is V(w_i) - W(v_i)."""
    return VectorField(*(apply(V, w) - apply(W, v) for v, w in zip(V.comps, W.comps)))


def divergence(V: VectorField, chart: str = "euclid") -> Poly:
    if chart == "euclid":
        acc = _zero()
        for v, name in zip(V.comps, COMPONENTS):
            acc = acc + v.diff(name)
        return acc
    if chart == "spectral":
        return V.spectral().divergence()
    raise ValueError(f"unknown chart {chart!r}")


# -- generators ---------------------------------------------------------------

GENERATOR_KINDS = ("HD", "HT", "HTt", "HTp", "HTpt")


@dataclass(frozen=True)
class GeneratorTerm:
    """Infinitesimal generator of one elementary one-parameter family.

    ``HD`` takes an invariant payload; the others a fiber payload.  A trailing
    ``t`` marks conjugation by the transposition.
    """

    kind: str
    payload: Poly

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        want = INVARIANT if self.kind == "HD" else FIBER
        if self.payload.ring != want:
            raise RingMismatch(f"{self.kind} payload must be {want.name}")


def _commutator_with_x(P: tuple[Poly, Poly, Poly, Poly]) -> VectorField:
    """The field x -> P'(x) x - x P'(x) for a polynomial matrix P'."""
    x = [Poly.var(EUCLID, n) for n in COMPONENTS]
    p = P
    out = []
    for i in range(2):
        for j in range(2):
            acc = _zero()
            for k in range(2):
                acc = acc + p[2 * i + k] * x[2 * k + j] - x[2 * i + k] * p[2 * k + j]
            out.append(acc)
    return VectorField(*out)


def _velocity(kind: str, payload: Poly) -> tuple[Poly, Poly, Poly, Poly]:
    """t-derivative at t=0 of the conjugating matrix of each family."""
    z = _zero()
    if kind == "HD":
        half = embed_invariant(payload, "euclid") / 2
        return (half, z, z, -half)
    if kind == "HT":
        return (z, z, embed_fiber(payload), z)
    if kind == "HTp":
        return (z, z, -Poly.var(EUCLID, "x11") * embed_fiber(payload), z)
    # transposed families: conjugation by the inverse transpose of the base
    # family's matrix evaluated at x^t
    base = _velocity(kind[:-1], payload)
    a, b, c, d = (transpose_poly(e) for e in base)
    return (-a, -c, -b, -d)


def make_generator(g: GeneratorTerm) -> VectorField:
    return _generator(g.kind, g.payload)


@lru_cache(maxsize=4096)
def _generator(kind: str, payload: Poly) -> VectorField:
    V = _commutator_with_x(_velocity(kind, payload))
    if not V.is_orthogonal:
        raise AssertionError(f"generator {kind} is not orthogonal")  # pragma: no cover
    return V


# -- text format -------------------------------------------------------------

_FIELD_ITEM = re.compile(r"^\s*(d11|d12|d21|d22)\s*:\s*(.*?)\s*$", re.S)


def parse_field(text: str) -> VectorField:
    """Parse ``d11: <poly>; d12: <poly>; ...``; missing components are 0."""
    comps = {}
    for chunk in text.replace("\n", ";").split(";"):
        if not chunk.strip():
            continue
        m = _FIELD_ITEM.match(chunk)
        if not m:
            raise ParseError(f"bad field component {chunk.strip()!r}")
        label, body = m.groups()
        if label in comps:
            raise ParseError(f"component {label} given twice")
        comps[label] = parse_poly(body, EUCLID)
    return VectorField(*(comps.get(lbl) for lbl in _LABELS))


def format_field(V: VectorField) -> str:
    return "; ".join(f"{lbl}: {c}" for lbl, c in zip(_LABELS, V.comps))
