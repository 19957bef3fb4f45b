"""Numeric geometry of the 2x2 spectral ball and its elementary automorphisms.

Matrices are numpy arrays of shape ``(2, 2)`` or batches ``(..., 2, 2)``;
every map here is vectorised over the leading axes.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .parsing import ParseError, parse_poly
from .poly import FIBER, INVARIANT, Poly, format_poly

__all__ = [
    "SpectrumPair",
    "ElementaryMap",
    "Word",
    "SingularResolvent",
    "NonCyclic",
    "SingularQ",
    "TAU_CYC",
    "MAP_KINDS",
    "spectrum",
    "spectrum_pair",
    "spectrum_distance",
    "spectral_radius",
    "in_ball",
    "is_cyclic",
    "in_G2",
    "mobius_scalar",
    "mobius_apply",
    "elementary_apply",
    "word_apply",
    "word_inverse",
    "parse_word",
    "format_word",
    "parse_complex",
    "format_complex",
    "expm1_ratio",
    "fiber_sample",
    "ball_sample",
    "random_word",
    "commutant_solve",
    "commutant_dimension",
]

TAU_CYC = 1e-12


class SingularResolvent(ValueError):
    """1 - conj(alpha) M is not invertible (M outside the ball)."""


class NonCyclic(ValueError):
    pass


class SingularQ(ValueError):
    pass


def _entries(M):
    return M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]


def _assemble(a, b, c, d, like=None):
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c, d)))
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = c
    out[..., 1, 1] = d
    return out


# -- spectra -------------------------------------------------------------------

def spectrum(M) -> np.ndarray:
    """Eigenvalues as an array of shape (..., 2).

    Roots of l^2 - s l + p with the discriminant branch chosen to avoid
    cancellation; the second root comes from Vieta (p / l1).
    """
    M = np.asarray(M, dtype=complex)
    a, b, c, d = _entries(M)
    s = a + d
    # (a - d)^2 + 4bc is s^2 - 4p without the cancellation in s^2 - 4ad
    disc = np.sqrt((a - d) ** 2 + 4 * b * c)
    flip = (s.real * disc.real + s.imag * disc.imag) < 0
    disc = np.where(flip, -disc, disc)
    l1 = (s + disc) / 2
    p = a * d - b * c
    safe = np.abs(l1) > 0
    l2 = np.where(safe, p / np.where(safe, l1, 1), s - l1)
    return np.stack([l1, l2], axis=-1)


@dataclass(frozen=True)
class SpectrumPair:
    """Unordered pair of eigenvalues."""

    l1: complex
    l2: complex

    def distance(self, other: "SpectrumPair") -> float:
        straight = max(abs(self.l1 - other.l1), abs(self.l2 - other.l2))
        crossed = max(abs(self.l1 - other.l2), abs(self.l2 - other.l1))
        return min(straight, crossed)

    def close(self, other: "SpectrumPair", tol: float = 1e-10) -> bool:
        return self.distance(other) <= tol

    def map(self, f) -> "SpectrumPair":
        return SpectrumPair(f(self.l1), f(self.l2))


def spectrum_pair(M) -> SpectrumPair:
    l1, l2 = spectrum(M)
    return SpectrumPair(complex(l1), complex(l2))


def spectrum_distance(A, B) -> np.ndarray:
    """Optimal-matching max difference between spectra (arrays (..., 2))."""
    A = np.asarray(A)
    B = np.asarray(B)
    straight = np.maximum(abs(A[..., 0] - B[..., 0]), abs(A[..., 1] - B[..., 1]))
    crossed = np.maximum(abs(A[..., 0] - B[..., 1]), abs(A[..., 1] - B[..., 0]))
    return np.minimum(straight, crossed)


def spectral_radius(M):
    return np.max(np.abs(spectrum(M)), axis=-1)


def in_ball(M):
    return spectral_radius(M) < 1


def is_cyclic(M, tol: float = TAU_CYC):
    """Non-scalar test: ||M - (tr/2) I|| > tol * ||M||."""
    M = np.asarray(M, dtype=complex)
    a, b, c, d = _entries(M)
    half = (a - d) / 2
    dev = np.sqrt(abs(half) ** 2 * 2 + abs(b) ** 2 + abs(c) ** 2)
    norm = np.linalg.norm(M, axis=(-2, -1))
    return dev > tol * norm


def in_G2(s, p) -> bool:
    """(s, p) are trace and determinant of a matrix in the ball."""
    M = np.array([[0, -p], [1, s]], dtype=complex)
    return bool(in_ball(M))


# -- Moebius -------------------------------------------------------------------

def _check_mobius(alpha: complex, gamma: complex):
    if not abs(alpha) < 1:
        raise ValueError(f"Moebius alpha must lie in the open disc, got {alpha}")
    if abs(abs(gamma) - 1) > 1e-12:
        raise ValueError(f"Moebius gamma must be unimodular, got {gamma}")


def mobius_scalar(alpha: complex, gamma: complex, z):
    return gamma * (z - alpha) / (1 - np.conj(alpha) * z)


def mobius_apply(alpha: complex, gamma: complex, M) -> np.ndarray:
    """gamma (M - alpha) (1 - conj(alpha) M)^-1 by explicit 2x2 arithmetic."""
    M = np.asarray(M, dtype=complex)
    a, b, c, d = _entries(M)
    ca = np.conj(alpha)
    # R = 1 - ca M, inverse via adjugate
    r11, r12, r21, r22 = 1 - ca * a, -ca * b, -ca * c, 1 - ca * d
    det = r11 * r22 - r12 * r21
    scale = np.maximum(1.0, np.linalg.norm(M, axis=(-2, -1))) ** 2
    if np.any(np.abs(det) <= 1e-14 * scale):
        raise SingularResolvent("1 - conj(alpha) M is singular")
    i11, i12, i21, i22 = r22 / det, -r12 / det, -r21 / det, r11 / det
    n11, n12, n21, n22 = a - alpha, b, c, d - alpha
    return gamma * _assemble(
        n11 * i11 + n12 * i21,
        n11 * i12 + n12 * i22,
        n21 * i11 + n22 * i21,
        n21 * i12 + n22 * i22,
    )


# -- elementary maps -----------------------------------------------------------

MAP_KINDS = ("TRANSPOSE", "MOBIUS", "DIAG", "SHEAR", "OVER", "SHEAR_T", "OVER_T")

_SERIES_TERMS = 12
_SERIES_CUTOFF = 1e-3


def expm1_ratio(w):
    """E(w) = (e^w - 1) / w with the removable singularity filled in."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < _SERIES_CUTOFF
    # Horner form of sum_{k>=0} w^k / (k+1)!
    ws = np.where(small, w, 0)
    series = np.zeros_like(w)
    for k in range(_SERIES_TERMS - 1, -1, -1):
        series = series * ws / (k + 2) + 1
    safe_w = np.where(small, 1, w)
    direct = np.expm1(safe_w) / safe_w
    return np.where(small, series, direct)


def _lower_conj(M, b):
    """[[1,0],[b,1]] M [[1,0],[-b,1]]."""
    x11, x12, x21, x22 = _entries(M)
    return _assemble(
        x11 - b * x12,
        x12,
        b * x11 + x21 - b * b * x12 - b * x22,
        b * x12 + x22,
    )


def _fiber_args(M):
    x11, x12, x21, x22 = _entries(M)
    return (x12, x11 + x22, x11 * x22 - x12 * x21)


def _eval(q: Poly, args, shape):
    return np.broadcast_to(np.asarray(q.evaluate(args), dtype=complex), shape)


@dataclass(frozen=True)
class ElementaryMap:
    """One elementary automorphism of the ball.

    ``DIAG`` conjugates by diag(e^{ta/2}, e^{-ta/2}) with ``a`` invariant;
    ``SHEAR`` / ``OVER`` conjugate by a lower unipotent matrix built from a
    fiber payload; ``*_T`` variants conjugate through the transposition.
    """

    kind: str
    payload: Poly | None = None
    t: float = 0.0
    alpha: complex = 0j
    gamma: complex = 1 + 0j

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if self.kind == "MOBIUS":
            _check_mobius(self.alpha, self.gamma)
        elif self.kind != "TRANSPOSE":
            want = INVARIANT if self.kind == "DIAG" else FIBER
            if self.payload is None or self.payload.ring != want:
                raise ValueError(f"{self.kind} needs a {want.name} payload")

    # constructors
    @classmethod
    def transpose(cls):
        return cls("TRANSPOSE")

    @classmethod
    def mobius(cls, alpha: complex, gamma: complex = 1):
        return cls("MOBIUS", alpha=complex(alpha), gamma=complex(gamma))

    @classmethod
    def diag(cls, a: Poly, t: float):
        return cls("DIAG", a, float(t))

    @classmethod
    def shear(cls, beta: Poly, t: float, transposed: bool = False):
        return cls("SHEAR_T" if transposed else "SHEAR", beta, float(t))

    @classmethod
    def over(cls, alpha: Poly, t: float, transposed: bool = False):
        return cls("OVER_T" if transposed else "OVER", alpha, float(t))

    @property
    def preserves_spectrum(self) -> bool:
        return self.kind != "MOBIUS"

    def inverse(self) -> "ElementaryMap":
        if self.kind == "TRANSPOSE":
            return self
        if self.kind == "MOBIUS":
            return ElementaryMap.mobius(-self.gamma * self.alpha, np.conj(self.gamma))
        return ElementaryMap(self.kind, self.payload, -self.t)

    def apply(self, M) -> np.ndarray:
        M = np.asarray(M, dtype=complex)
        k = self.kind
        if k == "TRANSPOSE":
            return np.swapaxes(M, -1, -2).copy()
        if k == "MOBIUS":
            return mobius_apply(self.alpha, self.gamma, M)
        if k.endswith("_T"):
            inner = ElementaryMap(k[:-2], self.payload, self.t)
            return np.swapaxes(inner.apply(np.swapaxes(M, -1, -2)), -1, -2).copy()
        shape = M.shape[:-2]
        x11, x12, x21, x22 = _entries(M)
        if k == "DIAG":
            a = _eval(self.payload, (x11, x22, x12 * x21), shape)
            return _assemble(x11, np.exp(self.t * a) * x12, np.exp(-self.t * a) * x21, x22)
        f = _eval(self.payload, _fiber_args(M), shape)
        if k == "SHEAR":
            b = self.t * f
        else:
            # x11 (1 - exp(x12 t alpha)) / x12, finite at x12 = 0
            ta = self.t * f
            b = -x11 * ta * expm1_ratio(x12 * ta)
        return _lower_conj(M, b)

    def __call__(self, M):
        return self.apply(M)

    def to_text(self) -> str:
        k = self.kind
        if k == "TRANSPOSE":
            return k
        if k == "MOBIUS":
            return f"MOBIUS alpha={format_complex(self.alpha)} gamma={format_complex(self.gamma)}"
        name = {"DIAG": "a", "SHEAR": "beta", "SHEAR_T": "beta"}.get(k, "alpha")
        return f"{k} {name}={format_poly(self.payload)} t={self.t!r}"


Word = list  # list[ElementaryMap], applied right-to-left


def elementary_apply(e: ElementaryMap, M) -> np.ndarray:
    return e.apply(M)


def word_apply(word: Sequence[ElementaryMap], M, track: bool = False):
    """Apply ``word`` right-to-left.  With ``track`` also return the largest
    entry magnitude seen along the way."""
    M = np.asarray(M, dtype=complex)
    peak = float(np.max(np.abs(M))) if M.size else 0.0
    for e in reversed(word):
        M = e.apply(M)
        if track:
            peak = max(peak, float(np.max(np.abs(M))))
    return (M, peak) if track else M


def word_inverse(word: Sequence[ElementaryMap]) -> list[ElementaryMap]:
    return [e.inverse() for e in reversed(word)]


# -- text format ---------------------------------------------------------------

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf|nan"
_COMPLEX = re.compile(rf"^\s*(?:([+-]?(?:{_NUM}))(?:([+-])((?:{_NUM})?)\s*i)?|([+-]?(?:{_NUM})?)\s*i)\s*$")


def format_complex(z: complex) -> str:
    z = complex(z)
    sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_complex(text: str) -> complex:
    """Parse ``re+im i`` (also a bare real or a bare imaginary ``im i``)."""
    m = _COMPLEX.match(text)
    if not m:
        raise ParseError(f"bad complex literal {text!r}")
    re_part, sign, im_part, pure = m.groups()
    if re_part is not None:
        re_v = float(re_part)
        if sign is None:
            return complex(re_v, 0.0)
        im_v = float(im_part) if im_part else 1.0
        return complex(re_v, -im_v if sign == "-" else im_v)
    mag = pure.lstrip("+-")
    im_v = float(mag) if mag else 1.0
    return complex(0.0, -im_v if pure.startswith("-") else im_v)


_KEYS = {
    "MOBIUS": ("alpha", "gamma"),
    "DIAG": ("a", "t"),
    "SHEAR": ("beta", "t"),
    "SHEAR_T": ("beta", "t"),
    "OVER": ("alpha", "t"),
    "OVER_T": ("alpha", "t"),
}


def _parse_fields(rest: str, keys: tuple[str, str], lineno: int) -> dict[str, str]:
    # payloads may contain spaces; split on "key=" markers
    pattern = re.compile(r"(?:^|\s)(" + "|".join(keys) + r")=")
    marks = list(pattern.finditer(rest))
    if [m.group(1) for m in marks] != list(keys):
        raise ParseError(f"line {lineno}: expected fields {' '.join(k + '=' for k in keys)}")
    out = {}
    for m, nxt in zip(marks, marks[1:] + [None]):
        out[m.group(1)] = rest[m.end(): nxt.start() if nxt else len(rest)].strip()
    return out


def parse_word(text: str) -> list[ElementaryMap]:
    """One element per line; blank lines and ``#`` comments are ignored."""
    word = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        if kind not in MAP_KINDS:
            raise ParseError(f"line {lineno}: unknown map {kind!r}")
        if kind == "TRANSPOSE":
            if rest.strip():
                raise ParseError(f"line {lineno}: TRANSPOSE takes no arguments")
            word.append(ElementaryMap.transpose())
            continue
        f = _parse_fields(rest, _KEYS[kind], lineno)
        try:
            if kind == "MOBIUS":
                word.append(ElementaryMap.mobius(parse_complex(f["alpha"]), parse_complex(f["gamma"])))
                continue
            ring = INVARIANT if kind == "DIAG" else FIBER
            payload = parse_poly(f[_KEYS[kind][0]], ring)
            try:
                t = float(f["t"])
            except ValueError:
                raise ParseError(f"line {lineno}: bad real t={f['t']!r}") from None
            word.append(ElementaryMap(kind, payload, t))
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    return word


def format_word(word: Iterable[ElementaryMap]) -> str:
    return "".join(e.to_text() + "\n" for e in word)


# -- sampling ------------------------------------------------------------------

def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _conditioned(rng: np.random.Generator, max_cond: float) -> np.ndarray:
    while True:
        P = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        if np.linalg.cond(P) <= max_cond:
            return P


def _dyadic(rng: np.random.Generator, size) -> np.ndarray:
    # 8-bit dyadic rationals keep the nilpotent construction exact
    return (rng.integers(-64, 65, size=size) + 1j * rng.integers(-64, 65, size=size)) / 64


def fiber_sample(l1: complex, l2: complex, count: int, seed=0, max_cond: float = 100.0) -> list[np.ndarray]:
    """Seeded matrices with spectrum {l1, l2}.

    Distinct eigenvalues: P diag(l1, l2) P^-1 with cond(P) <= max_cond.
    Equal eigenvalues: l I + u v^T with v^T u = 0, a conjugate of the Jordan
    block; the nilpotent part is built from dyadic entries so that the
    ``l = 0`` case is exactly nilpotent.
    """
    if not (abs(l1) < 1 and abs(l2) < 1):
        raise ValueError("eigenvalues must lie in the open unit disc")
    rng = _rng(seed)
    out = []
    if l1 == l2:
        for _ in range(count):
            u = _dyadic(rng, 2)
            while not np.any(u):
                u = _dyadic(rng, 2)
            c = _dyadic(rng, 1)[0] or 1
            v = np.array([u[1] * c, -u[0] * c])
            out.append(complex(l1) * np.eye(2) + np.outer(u, v))
        return out
    D = np.diag([complex(l1), complex(l2)])
    for _ in range(count):
        P = _conditioned(rng, max_cond)
        out.append(P @ D @ np.linalg.inv(P))
    return out


def ball_sample(count: int, seed=0, radius: float = 0.8, max_cond: float = 4.0) -> np.ndarray:
    """Seeded batch (count, 2, 2) in the ball with spectral radius <= radius."""
    rng = _rng(seed)
    out = np.empty((count, 2, 2), dtype=complex)
    for i in range(count):
        r = radius * np.sqrt(rng.random(2))
        lam = r * np.exp(2j * np.pi * rng.random(2))
        P = _conditioned(rng, max_cond)
        out[i] = P @ np.diag(lam) @ np.linalg.inv(P)
    return out


def _random_small_poly(rng: np.random.Generator, ring, max_degree: int = 2, terms: int = 2) -> Poly:
    q = Poly.zero(ring)
    for _ in range(terms):
        exps = [0] * ring.nvars
        for _ in range(int(rng.integers(0, max_degree + 1))):
            exps[int(rng.integers(ring.nvars))] += 1
        coef = int(rng.integers(-4, 5))
        q = q + Poly.monomial(ring, tuple(exps), coef) / 8 if coef else q
    return q


def random_word(seed, length: int = 20, mobius: bool = False, t_max: float = 0.25) -> list[ElementaryMap]:
    """Seeded word of conjugations and transpositions (plus Moebius maps if asked)."""
    rng = _rng(seed)
    kinds = [k for k in MAP_KINDS if mobius or k != "MOBIUS"]
    word = []
    for _ in range(length):
        k = kinds[int(rng.integers(len(kinds)))]
        if k == "TRANSPOSE":
            word.append(ElementaryMap.transpose())
        elif k == "MOBIUS":
            alpha = 0.5 * np.sqrt(rng.random()) * cmath.exp(2j * math.pi * rng.random())
            word.append(ElementaryMap.mobius(alpha, cmath.exp(2j * math.pi * rng.random())))
        else:
            ring = INVARIANT if k == "DIAG" else FIBER
            t = float(t_max * (2 * rng.random() - 1))
            word.append(ElementaryMap(k, _random_small_poly(rng, ring), t))
    return word


# -- commutant -----------------------------------------------------------------

def commutant_solve(P, Q, X, tol: float = 1e-8):
    """Solve P Q^-1 = a I + b X.  Returns (a, b) or None when no such pair
    exists (least-squares residual >= tol relative to max(1, |P Q^-1|), or
    a I + b X singular)."""
    P, Q, X = (np.asarray(m, dtype=complex) for m in (P, Q, X))
    if not is_cyclic(X):
        raise NonCyclic("X is a scalar matrix")
    qn = np.linalg.norm(Q)
    if qn == 0 or abs(np.linalg.det(Q)) <= 1e-14 * qn * qn:
        raise SingularQ("Q is not invertible")
    R = P @ np.linalg.inv(Q)
    A = np.stack([np.eye(2, dtype=complex).ravel(), X.ravel()], axis=1)
    coef, *_ = np.linalg.lstsq(A, R.ravel(), rcond=None)
    resid = np.linalg.norm(A @ coef - R.ravel())
    if resid >= tol * max(1.0, np.linalg.norm(R)):
        return None
    a, b = complex(coef[0]), complex(coef[1])
    S = a * np.eye(2) + b * X
    if abs(np.linalg.det(S)) <= 1e-14 * max(1.0, np.linalg.norm(S)) ** 2:
        return None
    return a, b


def commutant_dimension(X, tol: float = 1e-8) -> int:
    """Dimension of {M : MX = XM}: 2 for cyclic X, 4 for scalar X."""
    X = np.asarray(X, dtype=complex)
    if not is_cyclic(X):
        return 4
    I2 = np.eye(2)
    # vec(MX - XM) = (X^T kron I - I kron X) vec(M), row-major vec
    K = np.kron(I2, X.T) - np.kron(X, I2)
    sv = np.linalg.svd(K, compute_uv=False)
    return int(4 - np.sum(sv > tol * sv[0]))
