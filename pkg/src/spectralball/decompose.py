"""Decomposition of orthogonal polynomial fields into generator brackets.

Every polynomial field that annihilates trace and determinant is rewritten as
a finite sum of

    HD_a, [HD_a, HT_b], [HD_a, ~HT_b], [HD_a, HT'_b], [HD_a, ~HT'_b],
    [[HD_a, HT_1], ~HT'_1]

where ``~`` marks the transposition-conjugated families.  The result is a
:class:`Certificate` whose realized sum equals the input exactly.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from .coeffs import ExactComplex
from .fields import (
    GeneratorTerm,
    VectorField,
    divergence,
    format_field,
    lie_bracket,
    make_generator,
)
from .parsing import ParseError, parse_poly
from .poly import EUCLID, FIBER, INVARIANT, Poly, RingMismatch, as_invariant, embed_invariant

__all__ = [
    "CERT_KINDS",
    "CertificateTerm",
    "Certificate",
    "SplitV1",
    "ConstraintReport",
    "ConstraintViolation",
    "InternalResidual",
    "DegreeCapExceeded",
    "CertificateError",
    "split_v1",
    "check_constraints",
    "decompose",
    "decompose_steps",
    "realize",
    "reconstruct",
    "field_hash",
    "parse_certificate",
    "random_terms",
    "random_orthogonal_field",
    "DEFAULT_DEGREE_CAP",
]

DEFAULT_DEGREE_CAP = 12

CERT_KINDS = ("HD", "BR_DT", "BR_DTt", "BR_DTp", "BR_DTpt", "TRIPLE")
_BRACKET_PARTNER = {"BR_DT": "HT", "BR_DTt": "HTt", "BR_DTp": "HTp", "BR_DTpt": "HTpt"}


class ConstraintViolation(ValueError):
    def __init__(self, report: "ConstraintReport"):
        super().__init__(report.describe())
        self.report = report


class InternalResidual(AssertionError):
    """A step postcondition failed.  Always a bug, never tolerated."""


class DegreeCapExceeded(ValueError):
    pass


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class CertificateTerm:
    kind: str
    a: Poly
    b: Poly | None = None

    def __post_init__(self):
        if self.kind not in CERT_KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if self.a.ring != INVARIANT:
            raise RingMismatch("payload a must be an invariant polynomial")
        needs_b = self.kind in _BRACKET_PARTNER
        if needs_b and (self.b is None or self.b.ring != FIBER):
            raise RingMismatch(f"{self.kind} needs a fiber payload b")
        if not needs_b and self.b is not None:
            raise ValueError(f"{self.kind} takes no b payload")

    def to_text(self) -> str:
        line = f"TERM {self.kind} a={self.a}"
        if self.b is not None:
            line += f" b={self.b}"
        return line


# -- realization ----------------------------------------------------------------

def _mono(ring, exps) -> Poly:
    return Poly._trusted(ring, {exps: ExactComplex(1)})


@lru_cache(maxsize=None)
def _unit(kind: str, a_exps: tuple, b_exps: tuple | None) -> VectorField:
    hd = make_generator(GeneratorTerm("HD", _mono(INVARIANT, a_exps)))
    if kind == "HD":
        return hd
    if kind == "TRIPLE":
        one = Poly.const(FIBER, 1)
        inner = lie_bracket(hd, make_generator(GeneratorTerm("HT", one)))
        return lie_bracket(inner, make_generator(GeneratorTerm("HTpt", one)))
    partner = make_generator(GeneratorTerm(_BRACKET_PARTNER[kind], _mono(FIBER, b_exps)))
    return lie_bracket(hd, partner)


def realize(term: CertificateTerm) -> VectorField:
    """The field a certificate term stands for (bilinear in its payloads)."""
    comps: list[dict] = [{}, {}, {}, {}]
    b_items = list(term.b.terms.items()) if term.b is not None else [(None, 1)]
    for ae, ac in term.a.terms.items():
        for be, bc in b_items:
            c = ac * bc
            for acc, comp in zip(comps, _unit(term.kind, ae, be).comps):
                for e, v in comp.terms.items():
                    old = acc.get(e)
                    acc[e] = v * c if old is None else old + v * c
    return VectorField(*(Poly._trusted(EUCLID, {e: v for e, v in acc.items() if v}) for acc in comps))


def reconstruct(terms) -> VectorField:
    if isinstance(terms, Certificate):
        terms = terms.terms
    total = VectorField.zero()
    for t in terms:
        total = total + realize(t)
    return total


def field_hash(X: VectorField) -> str:
    return hashlib.sha256(format_field(X).encode()).hexdigest()[:16]


# -- the v1 splitter ----------------------------------------------------------

@dataclass
class SplitV1:
    """``q = sum_j x12^j f_j + sum_j x21^j g_j + phi`` with f_j, g_j, phi in
    the invariant ring (x11, x22, x12*x21)."""

    f: dict[int, Poly] = field(default_factory=dict)
    g: dict[int, Poly] = field(default_factory=dict)
    phi: Poly = field(default_factory=lambda: Poly.zero(INVARIANT))

    def reconstruct(self) -> Poly:
        x12, x21 = Poly.var(EUCLID, "x12"), Poly.var(EUCLID, "x21")
        total = embed_invariant(self.phi)
        for j, fj in self.f.items():
            total = total + x12 ** j * embed_invariant(fj)
        for j, gj in self.g.items():
            total = total + x21 ** j * embed_invariant(gj)
        return total

    @property
    def is_balanced(self) -> bool:
        return not self.f and not self.g


def split_v1(q: Poly) -> SplitV1:
    if q.ring != EUCLID:
        raise RingMismatch("split_v1 expects a euclid polynomial")
    f: dict[int, dict] = {}
    g: dict[int, dict] = {}
    phi: dict = {}
    for (a, b, c, d), coef in q.terms.items():
        if b > c:
            f.setdefault(b - c, {})[(a, d, c)] = coef
        elif c > b:
            g.setdefault(c - b, {})[(a, d, b)] = coef
        else:
            phi[(a, d, b)] = coef
    return SplitV1(
        f={j: Poly._trusted(INVARIANT, t) for j, t in sorted(f.items())},
        g={j: Poly._trusted(INVARIANT, t) for j, t in sorted(g.items())},
        phi=Poly._trusted(INVARIANT, phi),
    )


# -- constraints -----------------------------------------------------------------

@dataclass
class ConstraintReport:
    trace_residual: Poly
    det_residual: Poly
    phi_at_zero: Poly

    @property
    def passed(self) -> bool:
        return self.trace_residual.is_zero and self.det_residual.is_zero and self.phi_at_zero.is_zero

    def describe(self) -> str:
        if self.passed:
            return "constraints satisfied"
        lines = []
        if self.trace_residual:
            lines.append(f"v4 + v1 = {self.trace_residual} (must be 0)")
        if self.det_residual:
            lines.append(f"v1*(x22 - x11) - v2*x21 - v3*x12 = {self.det_residual} (must be 0)")
        if self.phi_at_zero:
            lines.append(f"balanced part of v1 at u3=0: {self.phi_at_zero} (must be 0)")
        return "; ".join(lines)


def check_constraints(V: VectorField) -> ConstraintReport:
    x11, x12, x21, x22 = (Poly.var(EUCLID, n) for n in EUCLID.variables)
    phi = split_v1(V.v1).phi
    at_zero = Poly._trusted(INVARIANT, {e: c for e, c in phi.terms.items() if e[2] == 0})
    return ConstraintReport(
        trace_residual=V.v1 + V.v4,
        det_residual=V.v1 * (x22 - x11) - V.v2 * x21 - V.v3 * x12,
        phi_at_zero=at_zero,
    )


# -- decomposition ---------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    terms: tuple[CertificateTerm, ...]
    input_hash: str
    max_degree: int = 0

    def reconstruct(self) -> VectorField:
        return reconstruct(self.terms)

    def to_text(self) -> str:
        lines = [f"CERT v1 input={self.input_hash}"]
        lines.extend(t.to_text() for t in self.terms)
        lines.append("RESIDUAL 0")
        return "\n".join(lines) + "\n"


def _unit_coefficient(poly: Poly, exps: tuple) -> ExactComplex:
    """The constant c with ``poly == c * monomial(exps)``; InternalResidual if
    ``poly`` has any other shape."""
    if set(poly.terms) != {exps}:
        raise InternalResidual(f"unit response {poly} is not a multiple of a single monomial")
    return poly.terms[exps]


@lru_cache(maxsize=None)
def _triple_v1_unit() -> ExactComplex:
    v1 = _unit("TRIPLE", (0, 0, 0), None).v1
    return _unit_coefficient(v1, (0, 1, 1, 0))


@lru_cache(maxsize=None)
def _divergence_unit(kind: str, j: int) -> ExactComplex:
    b = (j - 1, 0, 0)
    d = divergence(_unit(kind, (0, 0, 0), b))
    exps = (0, j, 0, 0) if kind == "BR_DTp" else (0, 0, j, 0)
    return _unit_coefficient(d, exps)


@lru_cache(maxsize=None)
def _v1_unit(kind: str, j: int) -> ExactComplex:
    v1 = _unit(kind, (0, 0, 0), (j - 1, 0, 0)).v1
    exps = (0, j, 0, 0) if kind == "BR_DT" else (0, 0, j, 0)
    return _unit_coefficient(v1, exps)


def _y_power(j: int) -> Poly:
    return Poly.var(FIBER, "y", j - 1)


class _Tracker:
    def __init__(self, cap: int):
        self.cap = cap
        self.max_degree = 0

    def see(self, V: VectorField, what: str):
        d = V.degree()
        self.max_degree = max(self.max_degree, d)
        if d > self.cap:
            raise DegreeCapExceeded(f"{what} reached degree {d} > cap {self.cap}")


def decompose_steps(
    X: VectorField, degree_cap: int = DEFAULT_DEGREE_CAP, stats: dict | None = None
) -> Iterator[tuple[str, list[CertificateTerm], VectorField]]:
    """Run the elimination and yield ``(step, new_terms, residual)`` after each
    of the steps A-D.  Each step's postcondition is asserted before yielding.
    The largest degree seen is written to ``stats["max_degree"]``."""
    report = check_constraints(X)
    if not report.passed:
        raise ConstraintViolation(report)
    track = _Tracker(degree_cap)
    track.see(X, "input")
    R = X

    def take(terms: list[CertificateTerm]):
        nonlocal R
        for t in terms:
            F = realize(t)
            track.see(F, f"term {t.kind}")
            R = R - F
        track.see(R, "residual")

    # A: cancel the balanced part of v1 with triple brackets
    phi = split_v1(R.v1).phi
    if any(e[2] == 0 for e in phi.terms):
        raise InternalResidual("balanced part of v1 does not vanish at u3 = 0")
    alpha = Poly._trusted(INVARIANT, {(a, b, c - 1): v for (a, b, c), v in phi.terms.items()})
    step = []
    if alpha:
        step.append(CertificateTerm("TRIPLE", alpha / _triple_v1_unit()))
    take(step)
    if not split_v1(R.v1).phi.is_zero:
        raise InternalResidual("step A left a balanced part in v1")
    yield "A", step, R

    # B: make the divergence balanced with [HD_a, HT'_b] and its transpose
    parts = split_v1(divergence(R))
    step = []
    for j, dj in parts.f.items():
        step.append(CertificateTerm("BR_DTp", dj / _divergence_unit("BR_DTp", j), _y_power(j)))
    for j, ej in parts.g.items():
        step.append(CertificateTerm("BR_DTpt", ej / _divergence_unit("BR_DTpt", j), _y_power(j)))
    take(step)
    if not split_v1(divergence(R)).is_balanced:
        raise InternalResidual("step B left an unbalanced divergence")
    if not split_v1(R.v1).phi.is_zero:
        raise InternalResidual("step B disturbed the balanced part of v1")
    yield "B", step, R

    # C: kill v1 with divergence-free brackets [HD_a, HT_b] and its transpose
    parts = split_v1(R.v1)
    step = []
    for j, fj in parts.f.items():
        step.append(CertificateTerm("BR_DT", fj / _v1_unit("BR_DT", j), _y_power(j)))
    for j, gj in parts.g.items():
        step.append(CertificateTerm("BR_DTt", gj / _v1_unit("BR_DTt", j), _y_power(j)))
    take(step)
    if R.v1 or R.v4:
        raise InternalResidual("step C left a nonzero v1 or v4")
    if not split_v1(divergence(R)).is_balanced:
        raise InternalResidual("step C broke the balanced divergence")
    yield "C", step, R

    # D: what remains is w*x12 d/dx12 - w*x21 d/dx21 with w balanced
    step = []
    if R:
        if R.v2.min_degree_in("x12") < 1:
            raise InternalResidual("v2 of the remainder is not divisible by x12")
        w = Poly._trusted(EUCLID, {(a, b - 1, c, d): v for (a, b, c, d), v in R.v2.terms.items()})
        if R.v3 != -(w * Poly.var(EUCLID, "x21")):
            raise InternalResidual("remainder is not of the form w*(x12 d12 - x21 d21)")
        if divergence(R):
            raise InternalResidual(f"remainder has nonzero divergence {divergence(R)}")
        w_inv = as_invariant(w)
        if w_inv is None:
            raise InternalResidual("remainder coefficient w is not balanced")
        step.append(CertificateTerm("HD", w_inv))
    take(step)
    if R:
        raise InternalResidual(f"nonzero final residual {R}")
    if stats is not None:
        stats["max_degree"] = track.max_degree
    yield "D", step, R


def decompose(X: VectorField, degree_cap: int = DEFAULT_DEGREE_CAP) -> Certificate:
    """Certified decomposition of an orthogonal polynomial field."""
    terms: list[CertificateTerm] = []
    stats: dict = {}
    for _, step_terms, _ in decompose_steps(X, degree_cap, stats):
        terms.extend(step_terms)
    return Certificate(tuple(terms), field_hash(X), stats["max_degree"])


# -- certificate text --------------------------------------------------------------

_HEADER = re.compile(r"^CERT v1 input=([0-9a-f]+)$")
_TERM = re.compile(r"^TERM\s+(\w+)\s+a=(.*?)(?:\s+b=(.*))?$")


def parse_certificate(text: str, verify: bool = True) -> Certificate:
    """Parse the CERT v1 format.  With ``verify`` the reconstruction must hash
    to the recorded input, otherwise :class:`CertificateError`."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty certificate")
    m = _HEADER.match(lines[0])
    if not m:
        raise ParseError(f"bad certificate header {lines[0]!r}")
    if lines[-1] != "RESIDUAL 0":
        raise ParseError("certificate must end with 'RESIDUAL 0'")
    terms = []
    for ln in lines[1:-1]:
        tm = _TERM.match(ln)
        if not tm:
            raise ParseError(f"bad certificate line {ln!r}")
        kind, a_text, b_text = tm.groups()
        if kind not in CERT_KINDS:
            raise ParseError(f"unknown term kind {kind!r}")
        a = parse_poly(a_text, INVARIANT)
        b = parse_poly(b_text, FIBER) if b_text is not None else None
        try:
            terms.append(CertificateTerm(kind, a, b))
        except (ValueError, TypeError) as exc:
            raise ParseError(str(exc)) from None
    cert = Certificate(tuple(terms), m.group(1))
    if verify and field_hash(cert.reconstruct()) != cert.input_hash:
        raise CertificateError("reconstruction does not match the referenced input")
    return cert


# -- random orthogonal fields -----------------------------------------------------

def _random_payload(rng: random.Random, ring, max_weight: int) -> Poly:
    """A sparse random polynomial whose Euclidean degree is at most
    ``max_weight`` (u3 and p count twice)."""
    weights = (1, 1, 2)
    terms = {}
    for _ in range(rng.randint(1, 2)):
        exps = [0, 0, 0]
        budget = rng.randint(0, max(0, max_weight))
        for _ in range(budget):
            i = rng.randrange(3)
            if sum(e * w for e, w in zip(exps, weights)) + weights[i] <= budget:
                exps[i] += 1
        num = rng.choice([-3, -2, -1, 1, 2, 3])
        den = rng.choice([1, 1, 2, 3])
        terms[tuple(exps)] = ExactComplex(num) / den
    return Poly(ring, terms)


def random_terms(rng: random.Random, max_degree: int = 6, count: int | None = None) -> list[CertificateTerm]:
    """Random certificate terms whose realizations have degree <= max_degree."""
    count = rng.randint(1, 4) if count is None else count
    # Euclidean degree of each realization is deg(a) + deg(b) + offset
    offset = {"HD": 1, "BR_DT": 1, "BR_DTt": 1, "BR_DTp": 2, "BR_DTpt": 2, "TRIPLE": 3}
    out = []
    while len(out) < count:
        kind = rng.choice(CERT_KINDS)
        room = max_degree - offset[kind]
        if room < 0:
            continue
        a_room = rng.randint(0, room)
        a = _random_payload(rng, INVARIANT, a_room)
        b = None
        if kind in _BRACKET_PARTNER:
            b = _random_payload(rng, FIBER, room - a_room)
        t = CertificateTerm(kind, a, b)
        if 0 <= realize(t).degree() <= max_degree:
            out.append(t)
    return out


def random_orthogonal_field(seed_or_rng, max_degree: int = 6) -> VectorField:
    rng = seed_or_rng if isinstance(seed_or_rng, random.Random) else random.Random(seed_or_rng)
    while True:
        X = reconstruct(random_terms(rng, max_degree))
        if X and X.degree() <= max_degree:
            return X
