"""Seeded numeric property sweeps shared by the CLI and the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    ElementaryMap,
    _random_small_poly,
    ball_sample,
    commutant_dimension,
    commutant_solve,
    is_cyclic,
    mobius_scalar,
    random_word,
    spectral_radius,
    spectrum,
    spectrum_distance,
    word_apply,
    word_inverse,
)
from .poly import FIBER, INVARIANT

__all__ = [
    "SweepResult",
    "group_law_sweep",
    "spectrum_sweep",
    "inverse_sweep",
    "ball_sweep",
    "commutant_sweep",
    "run_all",
]

GROUP_KINDS = ("DIAG", "SHEAR", "OVER", "SHEAR_T", "OVER_T")


@dataclass
class SweepResult:
    name: str
    samples: int
    worst: float
    tol: float
    failures: int = 0
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.failures == 0 and self.worst <= self.tol)

    def to_text(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  failures={self.failures}" if self.failures else ""
        note = f"  ({self.note})" if self.note else ""
        return f"[{tag}] {self.name}: samples={self.samples} worst={self.worst:.3e} tol={self.tol:.1e}{extra}{note}"

    def machine(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "worst": float(self.worst),
            "tol": self.tol,
            "failures": self.failures,
            "passed": self.passed,
        }


def group_law_sweep(kind: str, count: int = 100, seed: int = 0, tol: float = 1e-10) -> SweepResult:
    """E(t) o E(s) = E(t + s) pointwise on seeded samples."""
    rng = np.random.default_rng([seed, GROUP_KINDS.index(kind)])
    M = ball_sample(count, rng)
    ring = INVARIANT if kind == "DIAG" else FIBER
    worst = 0.0
    for i in range(count):
        payload = _random_small_poly(rng, ring)
        t, s = rng.uniform(-0.5, 0.5, size=2)
        lhs = ElementaryMap(kind, payload, t).apply(ElementaryMap(kind, payload, s).apply(M[i]))
        rhs = ElementaryMap(kind, payload, t + s).apply(M[i])
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return SweepResult(f"group law {kind}", count, worst, tol)


def spectrum_sweep(count: int = 1000, length: int = 20, seed: int = 0, mobius: bool = False,
                   tol: float = 1e-10) -> SweepResult:
    """Matched eigenvalue drift through random words; with Moebius elements the
    expected spectrum is the scalar Moebius image."""
    rng = np.random.default_rng([seed, 1 + int(mobius)])
    M = ball_sample(count, rng)
    S0 = spectrum(M)
    worst = 0.0
    for i in range(count):
        word = random_word(rng, length, mobius=mobius)
        lam = S0[i]
        for e in reversed(word):
            if e.kind == "MOBIUS":
                lam = mobius_scalar(e.alpha, e.gamma, lam)
        out = word_apply(word, M[i])
        worst = max(worst, float(spectrum_distance(spectrum(out), lam)))
    name = "Moebius spectrum action" if mobius else "spectrum preservation"
    return SweepResult(name, count, worst, tol)


def inverse_sweep(count: int = 200, length: int = 20, seed: int = 0, tol: float = 1e-10) -> SweepResult:
    rng = np.random.default_rng([seed, 3])
    M = ball_sample(count, rng)
    worst = 0.0
    for i in range(count):
        word = random_word(rng, length, mobius=True)
        back = word_apply(word_inverse(word), word_apply(word, M[i]))
        worst = max(worst, float(np.max(np.abs(back - M[i]))))
    return SweepResult("word * word^-1 = id", count, worst, tol)


def ball_sweep(count: int = 200, seed: int = 0) -> SweepResult:
    """Every elementary map keeps samples inside the ball."""
    rng = np.random.default_rng([seed, 4])
    M = ball_sample(count, rng)
    bad = 0
    worst = 0.0
    for i in range(count):
        for e in random_word(rng, 7, mobius=True):
            r = float(spectral_radius(e.apply(M[i])))
            worst = max(worst, r)
            bad += r >= 1
    return SweepResult("ball preservation (max spectral radius)", count, worst, 1.0 - 1e-15, bad)


def commutant_sweep(count: int = 1000, seed: int = 0, tol: float = 1e-8) -> SweepResult:
    """Recover constructed (a, b) from P = (aI + bX) Q and check commutant ranks."""
    rng = np.random.default_rng([seed, 5])
    worst = 0.0
    failures = 0
    for _ in range(count):
        X = ball_sample(1, rng)[0]
        if not is_cyclic(X):  # pragma: no cover - measure zero
            continue
        Q = ball_sample(1, rng)[0] + np.eye(2)
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        P = (a * np.eye(2) + b * X) @ Q
        got = commutant_solve(P, Q, X)
        if got is None:
            failures += 1
            continue
        worst = max(worst, abs(got[0] - a), abs(got[1] - b))
        if commutant_dimension(X) != 2:
            failures += 1
        c = complex(*rng.standard_normal(2))
        if commutant_dimension(c * np.eye(2)) != 4:
            failures += 1
    return SweepResult("commutant solve / rank", count, worst, tol, failures)


def run_all(seed: int = 0, tol: float = 1e-10, quick: bool = False) -> list[SweepResult]:
    n = 100 if quick else 1000
    out = [group_law_sweep(k, 100, seed, tol) for k in GROUP_KINDS]
    out.append(spectrum_sweep(n, 20, seed, False, tol))
    out.append(spectrum_sweep(n, 20, seed, True, tol))
    out.append(inverse_sweep(200, 20, seed, tol))
    out.append(ball_sweep(200, seed))
    out.append(commutant_sweep(n, seed, max(tol, 1e-8)))
    return out
