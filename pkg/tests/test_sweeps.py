import pytest

from spectralball import sweeps


@pytest.mark.parametrize("kind", sweeps.GROUP_KINDS)
def test_group_laws(kind):
    r = sweeps.group_law_sweep(kind, 30, seed=1)
    assert r.passed, r.to_text()


@pytest.mark.parametrize("mobius", [False, True])
def test_spectrum_sweep(mobius):
    r = sweeps.spectrum_sweep(60, 20, seed=2, mobius=mobius)
    assert r.passed, r.to_text()


def test_inverse_and_ball_sweeps():
    assert sweeps.inverse_sweep(40, seed=3).passed
    r = sweeps.ball_sweep(40, seed=3)
    assert r.passed and r.worst < 1


def test_commutant_sweep():
    r = sweeps.commutant_sweep(100, seed=4)
    assert r.passed and r.failures == 0


def test_sweeps_are_deterministic():
    a = sweeps.spectrum_sweep(20, seed=9, mobius=True)
    b = sweeps.spectrum_sweep(20, seed=9, mobius=True)
    assert a.worst == b.worst


def test_result_rendering():
    r = sweeps.SweepResult("demo", 10, 2e-9, 1e-10, failures=1)
    assert not r.passed
    assert r.to_text().startswith("[FAIL] demo")
    assert r.machine()["passed"] is False
