import random

import pytest

from spectralball.decompose import random_orthogonal_field
from spectralball.fields import (
    ChartError,
    GeneratorTerm,
    VectorField,
    apply,
    divergence,
    format_field,
    lie_bracket,
    make_generator,
    parse_field,
)
from spectralball.parsing import ParseError, parse_poly
from spectralball.poly import EUCLID, FIBER, INVARIANT, SPECTRAL, Poly, euclid_det, euclid_trace, to_spectral


def E(text):
    return parse_poly(text, EUCLID)


def gen(kind, payload):
    ring = INVARIANT if kind == "HD" else FIBER
    return make_generator(GeneratorTerm(kind, parse_poly(payload, ring)))


def random_field(rng, degree=4):
    def comp():
        terms = {}
        for _ in range(rng.randint(0, 3)):
            e = [0, 0, 0, 0]
            for _ in range(rng.randint(0, degree)):
                e[rng.randrange(4)] += 1
            terms[tuple(e)] = rng.randint(-3, 3)
        return Poly(EUCLID, terms)

    return VectorField(comp(), comp(), comp(), comp())


def random_payload(rng, ring):
    return Poly(ring, {tuple(rng.randint(0, 2) for _ in range(3)): rng.randint(-3, 3) or 1
                       for _ in range(rng.randint(1, 3))})


def test_apply_examples():
    assert apply(gen("HD", "1"), E("x12")) == E("x12")
    x11_field = VectorField(E("x11"))
    assert apply(x11_field, euclid_trace()) == E("x11")
    assert not x11_field.is_orthogonal


def test_hd_preserves_det():
    rng = random.Random(1)
    for _ in range(10):
        a = random_payload(rng, INVARIANT)
        assert apply(make_generator(GeneratorTerm("HD", a)), euclid_det()).is_zero


def test_generator_displays():
    assert gen("HD", "u1") == VectorField(v2=E("x11*x12"), v3=E("-x11*x21"))
    ht = gen("HT", "1")
    assert ht.v1 == E("-x12") and ht.v2.is_zero and ht.v4 == E("x12")
    htp = gen("HTp", "1")
    assert htp.v1 == E("x11*x12")
    assert htp.v3 == E("(x22 - x11)*x11")
    assert htp.v4 == E("-x11*x12")


def test_transposed_generators_mirror():
    for kind in ("HT", "HTp"):
        V = gen(kind, "y + s")
        W = make_generator(GeneratorTerm(kind + "t", parse_poly("y + s", FIBER)))
        # transposing swaps x12 <-> x21 in both the coordinates and the payload argument
        assert W == V.transpose()


@pytest.mark.parametrize("kind", ["HD", "HT", "HTt", "HTp", "HTpt"])
def test_generators_orthogonal(kind):
    rng = random.Random(kind)
    ring = INVARIANT if kind == "HD" else FIBER
    for _ in range(5):
        V = make_generator(GeneratorTerm(kind, random_payload(rng, ring)))
        assert apply(V, euclid_trace()).is_zero
        assert apply(V, euclid_det()).is_zero
        assert V.is_orthogonal


def test_bracket_examples():
    br = lie_bracket(gen("HD", "1"), gen("HT", "1"))
    # -y d/dx in spectral form: HD_1(-x12) = -x12, the printed display's negative
    assert br.v1 == E("-x12")
    assert br.spectral().P == parse_poly("-y", SPECTRAL)
    br2 = lie_bracket(gen("HD", "u1"), gen("HTp", "1"))
    sp = br2.spectral()
    # x*y*a*(yb)'_y d/dx - x*y^2*a'_x*b d/dy with a = x, b = 1
    assert sp.P == parse_poly("x^2*y", SPECTRAL)
    assert sp.Q == parse_poly("-x*y^2", SPECTRAL)
    assert divergence(br2, "spectral") == parse_poly("x*y", SPECTRAL)


def test_divergence_examples():
    rng = random.Random(7)
    for _ in range(5):
        a = random_payload(rng, INVARIANT)
        b = random_payload(rng, FIBER)
        hd = make_generator(GeneratorTerm("HD", a))
        assert divergence(hd).is_zero
        assert divergence(lie_bracket(hd, make_generator(GeneratorTerm("HT", b)))).is_zero


def test_spectral_divergence_requires_orthogonality():
    with pytest.raises(ChartError):
        divergence(VectorField(E("x11")), "spectral")


def test_antisymmetry_and_jacobi():
    rng = random.Random(3)
    for _ in range(4):
        U, V, W = (random_field(rng) for _ in range(3))
        assert lie_bracket(V, V).is_zero
        assert lie_bracket(U, V) == -lie_bracket(V, U)
        jac = (lie_bracket(lie_bracket(U, V), W) + lie_bracket(lie_bracket(V, W), U)
               + lie_bracket(lie_bracket(W, U), V))
        assert jac.is_zero


def test_orthogonality_is_bracket_stable():
    for seed in range(6):
        V = random_orthogonal_field(seed, 4)
        W = random_orthogonal_field(100 + seed, 4)
        assert lie_bracket(V, W).is_orthogonal


def test_divergence_chart_agreement():
    for seed in range(10):
        V = random_orthogonal_field(seed, 5)
        assert to_spectral(divergence(V, "euclid")) == divergence(V, "spectral")


def test_field_text_round_trip():
    V = parse_field("d12: x12; d21: -x21")
    assert V == gen("HD", "1")
    assert parse_field(format_field(V)) == V
    for seed in range(5):
        X = random_orthogonal_field(seed, 5)
        assert parse_field(format_field(X)) == X
    assert parse_field("").is_zero


@pytest.mark.parametrize("bad", ["d13: x11", "d11 x11", "d11: x11; d11: x22", "d11: (x11"])
def test_field_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_field(bad)
