"""Composition words approximating flows of certified fields.

Generator terms have exact flows (one elementary map).  Bracket terms are
approximated by group commutators of exact flows, symmetrised so that the
log of the word is ``t [A, B] + O(t^2)``; with Lie-Trotter splitting over
``N`` steps this gives first-order global convergence.  The nested term
``[[HD_a, HT_1], ~HT'_1]`` uses a second-order inner commutator so the outer
one keeps the same order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .decompose import Certificate, CertificateTerm
from .fields import VectorField
from .geometry import ElementaryMap, ball_sample, spectrum, spectrum_distance, word_apply, word_inverse
from .poly import FIBER, Poly

__all__ = [
    "StepOverflow",
    "FlowPlan",
    "ConvergenceRow",
    "ConvergenceReport",
    "ORIENTATION",
    "compile_field",
    "reference_flow",
    "group_commutator",
    "commutator_flow",
    "generator_flow",
    "exact_word",
    "trotter_word",
    "convergence_study",
]

Word = list  # list[ElementaryMap]
Flow = Callable[[float], Word]

# log(group_commutator(A, B, s)) = ORIENTATION * s^2 [A, B] + O(s^3) under the
# library bracket; fixed once by the small-t calibration in the test suite
ORIENTATION = 1

# second-order commutator: weights (+V, +V, -V(c s)) with c^4 = 2 cancel s^4
_C4 = 2 ** 0.25
_SECOND_ORDER_GAIN = 8 - 4 * math.sqrt(2)


class StepOverflow(ArithmeticError):
    """Reference trajectory left the configured bounded region."""


# -- reference integrator ------------------------------------------------------

def compile_field(V: VectorField) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised evaluator M (..., 2, 2) -> V(M)."""
    monos: dict[tuple, int] = {}
    for comp in V.comps:
        for e in comp.terms:
            monos.setdefault(e, len(monos))
    E = np.array(list(monos) or [(0, 0, 0, 0)], dtype=int)
    C = np.zeros((len(E), 4), dtype=complex)
    for k, comp in enumerate(V.comps):
        for e, c in comp.terms.items():
            C[monos[e], k] = complex(c)

    def evaluate(M):
        M = np.asarray(M, dtype=complex)
        vals = M.reshape(M.shape[:-2] + (4,))
        mono = np.prod(vals[..., None, :] ** E, axis=-1)
        return (mono @ C).reshape(M.shape)

    return evaluate


def reference_flow(V: VectorField, M0, t: float, steps: int, bound: float = 1e6) -> np.ndarray:
    """Classical RK4 for dM/ds = V(M), fixed step t / steps."""
    if steps < 1:
        raise ValueError("steps must be positive")
    f = compile_field(V)
    M = np.array(M0, dtype=complex)
    if V.is_zero or t == 0:
        return M
    h = t / steps
    for _ in range(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = f(M)
            k2 = f(M + h / 2 * k1)
            k3 = f(M + h / 2 * k2)
            k4 = f(M + h * k3)
            M = M + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(M)) or np.max(np.abs(M)) > bound:
            raise StepOverflow(f"trajectory entries exceed {bound:g}")
    return M


# -- words ---------------------------------------------------------------------

_MAP_OF = {"HD": "DIAG", "HT": "SHEAR", "HTt": "SHEAR_T", "HTp": "OVER", "HTpt": "OVER_T"}


def generator_flow(kind: str, payload: Poly) -> Flow:
    """Exact flow of a generator field as a one-element word."""
    name = _MAP_OF[kind]

    def flow(t: float) -> Word:
        return [ElementaryMap(name, payload, float(t))] if t else []

    return flow


def group_commutator(fa: Flow, fb: Flow, s: float) -> Word:
    """Apply fa(s), fb(s), fa(-s), fb(-s) in that order."""
    return fb(-s) + fa(-s) + fb(s) + fa(s)


def _odd(flow_pos: Callable[[float], Word]) -> Flow:
    def flow(t: float) -> Word:
        if t == 0:
            return []
        if t < 0:
            return word_inverse(flow_pos(-t))
        return flow_pos(t)

    return flow


def commutator_flow(fa: Flow, fb: Flow, order: int = 1) -> Flow:
    """Approximate flow of the library bracket [A, B] for time t.

    order 1: V(s) = C(s) C(-s) with 2 s^2 = t, log V = t [A,B] + O(t^2).
    order 2: V(s) V(-s) V(s) V(-s) V(c s)^-1 V(-c s)^-1 with c^4 = 2,
    log = t [A,B] + O(t^3).
    """
    if ORIENTATION < 0:
        fa, fb = fb, fa

    def V(s: float) -> Word:
        return group_commutator(fa, fb, s) + group_commutator(fa, fb, -s)

    if order == 1:
        return _odd(lambda t: V(math.sqrt(t / 2)))
    if order == 2:
        def second(t: float) -> Word:
            s = math.sqrt(t / _SECOND_ORDER_GAIN)
            cs = _C4 * s
            return V(s) + V(-s) + V(s) + V(-s) + word_inverse(V(cs)) + word_inverse(V(-cs))

        return _odd(second)
    raise ValueError("order must be 1 or 2")


def _term_flow(term: CertificateTerm) -> Flow:
    if term.kind == "HD":
        return generator_flow("HD", term.a)
    hd = generator_flow("HD", term.a)
    if term.kind == "TRIPLE":
        one = Poly.const(FIBER, 1)
        inner = commutator_flow(hd, generator_flow("HT", one), order=2)
        return commutator_flow(inner, generator_flow("HTpt", one), order=1)
    kind = {"BR_DT": "HT", "BR_DTt": "HTt", "BR_DTp": "HTp", "BR_DTpt": "HTpt"}[term.kind]
    return commutator_flow(hd, generator_flow(kind, term.b), order=1)


def exact_word(term: CertificateTerm, t: float) -> Word:
    """Word for the time-t flow of realize(term).

    Exact for HD terms; commutator approximation for bracket terms.
    """
    return _term_flow(term)(float(t))


@dataclass
class FlowPlan:
    certificate: Certificate
    t: float
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")


def trotter_word(plan: FlowPlan) -> Word:
    """N first-order Lie-Trotter steps; within a step the certificate's first
    term acts first."""
    terms = plan.certificate.terms
    if not terms or plan.t == 0:
        return []
    h = plan.t / plan.N
    step: Word = []
    for term in terms:
        step = exact_word(term, h) + step
    return step * plan.N


# -- convergence ---------------------------------------------------------------

@dataclass
class ConvergenceRow:
    N: int
    error: float
    drift: float
    word_length: int


@dataclass
class ConvergenceReport:
    t: float
    seed: int
    probes: int
    reference_steps: int
    rows: list[ConvergenceRow] = field(default_factory=list)
    slope: float | None = None
    exact: bool = False

    def to_text(self) -> str:
        lines = [
            f"convergence study  t={self.t!r}  probes={self.probes}  seed={self.seed}  "
            f"reference_steps={self.reference_steps}",
            f"{'N':>6}  {'error':>12}  {'spectrum_drift':>14}  {'word_length':>11}",
        ]
        for r in self.rows:
            lines.append(f"{r.N:>6}  {r.error:>12.4e}  {r.drift:>14.4e}  {r.word_length:>11}")
        if self.exact:
            lines.append("slope: exact (errors at roundoff for every N)")
        elif self.slope is None:
            lines.append("slope: n/a (fewer than two rows)")
        else:
            lines.append(f"slope: {self.slope:.4f}  (decay order of error in N)")
        lines.append("")
        lines.append("```machine")
        lines.append(json.dumps(self.machine(), sort_keys=True))
        lines.append("```")
        return "\n".join(lines) + "\n"

    def machine(self) -> dict:
        return {
            "t": self.t,
            "seed": self.seed,
            "probes": self.probes,
            "reference_steps": self.reference_steps,
            "rows": [
                {"N": r.N, "error": r.error, "drift": r.drift, "word_length": r.word_length}
                for r in self.rows
            ],
            "slope": self.slope,
            "exact": self.exact,
        }


ROUNDOFF = 1e-10


def fit_slope(Ns: Sequence[int], errors: Sequence[float]) -> float | None:
    """Negated least-squares slope of log(error) against log(N)."""
    pts = [(math.log(n), math.log(e)) for n, e in zip(Ns, errors) if e > 0]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(-np.polyfit(x, y, 1)[0])


def convergence_study(
    certificate: Certificate,
    t: float,
    Ns: Sequence[int],
    probes: np.ndarray | None = None,
    seed: int = 0,
    reference_steps: int | None = None,
    bound: float = 1e6,
) -> ConvergenceReport:
    """Compare trotter words against the RK4 flow of the reconstructed field.

    Raises :class:`StepOverflow` when the reference trajectory or any
    intermediate matrix of a word exceeds ``bound``.
    """
    if probes is None:
        probes = ball_sample(20, seed)
    probes = np.asarray(probes, dtype=complex)
    if reference_steps is None:
        reference_steps = max(2000, 2 * max(Ns))
    X = certificate.reconstruct()
    ref = reference_flow(X, probes, t, reference_steps, bound)
    spec0 = spectrum(probes)
    report = ConvergenceReport(float(t), seed, len(probes), reference_steps)
    for N in Ns:
        word = trotter_word(FlowPlan(certificate, t, N))
        with np.errstate(over="ignore", invalid="ignore"):
            out, peak = word_apply(word, probes, track=True)
        if not np.isfinite(peak) or peak > bound:
            raise StepOverflow(
                f"word for N={N} left the bounded region (peak entry {peak:.3g}); try a smaller t"
            )
        err = float(np.max(np.abs(out - ref)))
        drift = float(np.max(spectrum_distance(spectrum(out), spec0)))
        report.rows.append(ConvergenceRow(int(N), err, drift, len(word)))
    errs = [r.error for r in report.rows]
    report.exact = all(e <= ROUNDOFF for e in errs)
    report.slope = None if report.exact else fit_slope(list(Ns), errs)
    return report
