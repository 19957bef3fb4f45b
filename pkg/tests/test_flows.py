import math

import numpy as np
import pytest

from spectralball.decompose import Certificate, CertificateTerm, field_hash, realize, reconstruct
from spectralball.fields import GeneratorTerm, VectorField, make_generator
from spectralball.flows import (
    ORIENTATION,
    FlowPlan,
    StepOverflow,
    compile_field,
    convergence_study,
    exact_word,
    fit_slope,
    generator_flow,
    group_commutator,
    reference_flow,
    trotter_word,
)
from spectralball.geometry import ElementaryMap, ball_sample, spectrum, word_apply, word_inverse
from spectralball.parsing import parse_poly
from spectralball.poly import FIBER, INVARIANT

JORDAN = np.array([[0, 1], [0, 0]], dtype=complex)


def U(text):
    return parse_poly(text, INVARIANT)


def F(text):
    return parse_poly(text, FIBER)


def term(kind, a, b=None):
    return CertificateTerm(kind, U(a), F(b) if b is not None else None)


def cert(*terms):
    X = reconstruct(terms)
    return Certificate(tuple(terms), field_hash(X), X.degree())


def maxdiff(A, B):
    return float(np.max(np.abs(np.asarray(A) - np.asarray(B))))


PROBES = ball_sample(8, 0)


# -- reference integrator ------------------------------------------------------

def test_compile_field_matches_exact_evaluation():
    V = realize(term("BR_DTp", "u1 - 1/2", "y + s"))
    f = compile_field(V)
    for M in PROBES:
        assert maxdiff(f(M), V.evaluate(M)) < 1e-13


def test_reference_flow_hd_example():
    hd = make_generator(GeneratorTerm("HD", U("1")))
    out = reference_flow(hd, JORDAN, 1.0, 100)
    assert maxdiff(out, [[0, math.e], [0, 0]]) < 1e-8


def test_reference_flow_zero_field():
    M = PROBES[0]
    assert np.array_equal(reference_flow(VectorField.zero(), M, 0.7, 10), M)


def test_reference_flow_conserves_trace_and_det():
    V = realize(term("BR_DT", "u2", "p - 1"))
    out = reference_flow(V, PROBES, 0.5, 400)
    assert maxdiff(np.trace(out, axis1=1, axis2=2), np.trace(PROBES, axis1=1, axis2=2)) < 1e-8
    assert maxdiff(np.linalg.det(out), np.linalg.det(PROBES)) < 1e-8


def test_reference_flow_is_fourth_order():
    a = U("u1 + u3")
    V = make_generator(GeneratorTerm("HD", a))
    exact = ElementaryMap.diag(a, 1.0).apply(PROBES)
    e1 = maxdiff(reference_flow(V, PROBES, 1.0, 10), exact)
    e2 = maxdiff(reference_flow(V, PROBES, 1.0, 20), exact)
    assert 12 < e1 / e2 < 20


def test_reference_flow_overflow():
    V = make_generator(GeneratorTerm("HD", U("1")))
    with pytest.raises(StepOverflow):
        reference_flow(V, JORDAN, 30.0, 100, bound=1e6)


# -- words ---------------------------------------------------------------------

def test_exact_word_for_hd_is_the_flow():
    for a in ("1", "u1*u2 - u3", "1/2*u3^2"):
        V = make_generator(GeneratorTerm("HD", U(a)))
        got = word_apply(exact_word(term("HD", a), 0.6), PROBES)
        assert maxdiff(got, reference_flow(V, PROBES, 0.6, 400)) < 1e-8


def test_exact_word_at_zero_is_empty():
    for t in (term("HD", "u1"), term("BR_DT", "1", "1"), term("TRIPLE", "1")):
        assert exact_word(t, 0) == []


def test_generator_flows_are_exact():
    for kind, payload in (("HT", "y - s"), ("HTt", "p"), ("HTp", "1/2"), ("HTpt", "y^2")):
        V = make_generator(GeneratorTerm(kind, F(payload)))
        got = word_apply(generator_flow(kind, F(payload))(0.4), PROBES)
        assert maxdiff(got, reference_flow(V, PROBES, 0.4, 400)) < 1e-8


def test_commutator_orientation_calibration():
    # log of the plain commutator word is ORIENTATION * s^2 [A, B] + O(s^3)
    a, b = U("1"), F("1")
    fa, fb = generator_flow("HD", a), generator_flow("HT", b)
    br = realize(CertificateTerm("BR_DT", a, b))
    errs, wrong = [], []
    for s in (0.04, 0.02, 0.01):
        got = word_apply(group_commutator(fa, fb, s), PROBES)
        errs.append(maxdiff(got, reference_flow(br, PROBES, ORIENTATION * s * s, 50)))
        wrong.append(maxdiff(got, reference_flow(br, PROBES, -ORIENTATION * s * s, 50)))
    order = math.log(errs[0] / errs[2], 4)
    assert order > 2.7
    assert math.log(wrong[0] / wrong[2], 4) < 2.2


@pytest.mark.parametrize("kind,a,b", [
    ("BR_DT", "1", "1"),
    ("BR_DTt", "u1", "s"),
    ("BR_DTp", "u3", "y"),
    ("BR_DTpt", "1", "1/2"),
    ("TRIPLE", "1/2", None),
])
def test_bracket_words_have_small_local_error(kind, a, b):
    t_ = term(kind, a, b)
    V = realize(t_)
    errs = []
    for t in (0.02, 0.01, 0.005):
        got = word_apply(exact_word(t_, t), PROBES)
        errs.append(maxdiff(got, reference_flow(V, PROBES, t, 50)))
    # at least the O(t^(3/2)) local defect of a plain commutator
    assert math.log(errs[0] / errs[2], 2) / 2 >= 1.4


def test_negative_time_is_the_inverse_word():
    t_ = term("BR_DTp", "u1", "y")
    fwd = word_apply(exact_word(t_, 0.1), PROBES)
    assert maxdiff(word_apply(exact_word(t_, -0.1), fwd), PROBES) < 1e-12


# -- trotter splitting ---------------------------------------------------------

def test_trotter_pure_hd_is_exact():
    c = cert(term("HD", "u1"))
    ref = reference_flow(c.reconstruct(), PROBES, 0.5, 2000)
    for N in (1, 3, 16):
        assert maxdiff(word_apply(trotter_word(FlowPlan(c, 0.5, N)), PROBES), ref) < 1e-10


def test_trotter_empty_certificate():
    assert trotter_word(FlowPlan(cert(), 0.5, 4)) == []


def test_flow_plan_needs_positive_n():
    with pytest.raises(ValueError):
        FlowPlan(cert(), 0.5, 0)


def test_trotter_two_terms_converge():
    c = cert(term("HD", "u1 + u2"), term("BR_DT", "1/2", "1"))
    ref = reference_flow(c.reconstruct(), PROBES, 0.5, 2000)
    errs = [maxdiff(word_apply(trotter_word(FlowPlan(c, 0.5, N)), PROBES), ref) for N in (4, 8, 16, 32)]
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))


def test_trotter_reversibility():
    c = cert(term("BR_DTt", "u1", "s"), term("HD", "1/2*u3"), term("TRIPLE", "1/2"))
    fwd = trotter_word(FlowPlan(c, 0.3, 8))
    back = trotter_word(FlowPlan(c, -0.3, 8))
    assert maxdiff(word_apply(word_inverse(fwd), word_apply(fwd, PROBES)), PROBES) < 1e-8
    # the -t plan is a different splitting of the same inverse flow
    ref = reference_flow(c.reconstruct(), PROBES, 0.3, 1000)
    assert maxdiff(word_apply(back, ref), PROBES) < 0.05


def test_trotter_words_preserve_spectrum():
    c = cert(term("BR_DTp", "u3", "y"), term("HD", "u1"))
    out = word_apply(trotter_word(FlowPlan(c, 0.5, 64)), PROBES)
    got, want = np.sort_complex(spectrum(out)), np.sort_complex(spectrum(PROBES))
    assert maxdiff(got, want) < 1e-10


# -- convergence ---------------------------------------------------------------

def test_fit_slope():
    Ns = [16, 64, 256]
    assert fit_slope(Ns, [1 / n for n in Ns]) == pytest.approx(1.0)
    assert fit_slope(Ns, [n ** -2.0 for n in Ns]) == pytest.approx(2.0)
    assert fit_slope([16], [0.1]) is None


def test_convergence_study_pure_hd():
    c = cert(term("HD", "u1"), term("HD", "u2*u3 - 1"))
    rep = convergence_study(c, 0.5, [16, 64], PROBES)
    assert rep.exact and rep.slope is None
    assert all(r.error < 1e-10 and r.drift < 1e-10 for r in rep.rows)
    assert "slope: exact" in rep.to_text()


def test_convergence_study_report_formats():
    c = cert(term("HD", "u1"), term("BR_DT", "1/2", "1"))
    rep = convergence_study(c, 0.25, [4, 16, 64], PROBES, seed=3)
    assert not rep.exact and rep.slope > 0.8
    assert all(r.drift < 1e-10 for r in rep.rows)
    text = rep.to_text()
    assert "```machine" in text
    machine = rep.machine()
    assert [row["N"] for row in machine["rows"]] == [4, 16, 64]
    assert machine["seed"] == 3 and machine["probes"] == len(PROBES)


def test_convergence_study_overflow():
    c = cert(term("BR_DT", "9/2*u1*u3", "1"))
    with pytest.raises(StepOverflow):
        convergence_study(c, 50.0, [4], PROBES, bound=1e3)
