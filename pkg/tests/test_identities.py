import pytest

from spectralball.identities import (
    CONJ,
    DOCUMENTED,
    monomial_basis,
    reduce_unimodular,
    verify_conjugation_suite,
    verify_generator_suite,
)
from spectralball.parsing import parse_poly
from spectralball.poly import INVARIANT


@pytest.fixture(scope="module")
def suite():
    return verify_generator_suite(max_degree=2)


@pytest.fixture(scope="module")
def conj():
    return verify_conjugation_suite()


def test_monomial_basis():
    basis = monomial_basis(INVARIANT, 2)
    assert len(basis) == 10
    assert parse_poly("u1*u3", INVARIANT) in basis


def test_reduce_unimodular():
    q = parse_poly("p11*p22 - p12*p21", CONJ)
    assert reduce_unimodular(q) == parse_poly("1", CONJ)
    q = parse_poly("p11^2*p22^2*x11", CONJ)
    assert reduce_unimodular(q) == reduce_unimodular(parse_poly("(1 + p12*p21)^2*x11", CONJ))


@pytest.mark.parametrize("name", [
    "HD_a entries",
    "HD_a spectral",
    "HT_beta spectral",
    "HT'_beta spectral",
    "~HT'_b spectral",
    "div[HD_a,HT_b]",
    "[HD_a,HT'_b]",
    "div[HD_a,HT'_b]",
    "divergence formula",
])
def test_exact_displays(suite, name):
    assert suite.get(name).status == "exact"


def test_sign_flipped_displays(suite):
    assert suite.get("[HD_a,HT_b]").status == "sign"
    assert suite.get("[[HD_a,HT_1],~HT'_1] d/dx").status == "sign"


def test_documented_typos(suite):
    for name in ("HT_beta entries", "HT'_alpha entries", "~HT_beta entries", "~HT'_alpha entries"):
        r = suite.get(name)
        assert r.status == "mismatch" and r.documented and r.diff


def test_no_undocumented_mismatch(suite, conj):
    assert suite.ok and not suite.undocumented
    assert conj.ok and not conj.undocumented
    assert all(r.acceptable for r in suite.results + conj.results)


def test_conjugation_expansions(conj):
    assert conj.get("p x p^-1 on Omega''").status == "exact"
    omega1 = conj.get("p x p^-1 on Omega'")
    assert omega1.status == "mismatch"
    assert "-p12^2*x21" in omega1.diff and "p22^2*x21" in omega1.diff
    assert conj.get("p x p^-1 on U''").status == "mismatch"
    assert conj.get("T_b expansion").status == "mismatch"


def test_report_text(suite):
    text = suite.to_text()
    for r in suite.results:
        assert r.name in text
    assert "documented" in text


def test_documented_table_is_used(suite, conj):
    names = {r.name for r in suite.results + conj.results}
    assert set(DOCUMENTED) <= names
