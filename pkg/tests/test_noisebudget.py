import pytest
from hypothesis import given, strategies as st

from cosmicbell import noisebudget as nb
from cosmicbell.noisebudget import NoiseModel

# ranges keep f away from 1, where float rounding would flatten it
rates = st.floats(0.0, 1e5)
pos = st.floats(1.0, 1e6)
delta = st.floats(1e-2, 1e5)


def test_local_fraction_examples():
    assert nb.local_fraction(1e4, NoiseModel()) == 0.0
    assert nb.local_fraction(100.0, NoiseModel(60.0, 40.0)) == 0.5
    f = nb.local_fraction(1e4, NoiseModel(400.0, 60.0))
    assert f == pytest.approx(460 / 10460)
    assert f == pytest.approx(0.044, abs=1e-3)
    assert nb.budget_check(f, "CHSH").passed


def test_local_fraction_errors():
    with pytest.raises(ValueError):
        nb.local_fraction(0.0, NoiseModel())
    with pytest.raises(ValueError):
        NoiseModel(-1.0, 0.0)


def test_budget_examples():
    edge = nb.budget_check(0.046, "CHSH")
    assert not edge.passed and edge.margin == 0.0
    ghz = nb.budget_check(0.3, "GHZ")
    assert ghz.passed and ghz.margin == pytest.approx(0.115)
    assert nb.budget_check(0.0, "chsh").passed and nb.budget_check(0.0, "GHZ").passed
    assert not nb.budget_check(0.415, "GHZ").passed
    with pytest.raises(ValueError):
        nb.budget_check(0.1, "CGLMP")
    with pytest.raises(ValueError):
        nb.budget_check(1.5)


@given(pos, rates, rates, delta)
def test_monotone_in_noise(signal, bg, dark, dx):
    f = nb.local_fraction(signal, NoiseModel(bg, dark))
    assert nb.local_fraction(signal, NoiseModel(bg + dx, dark)) > f
    assert nb.local_fraction(signal, NoiseModel(bg, dark + dx)) > f


@given(pos, rates, rates, delta)
def test_monotone_in_signal(signal, bg, dark, dx):
    noise = NoiseModel(bg, dark)
    f = nb.local_fraction(signal, noise)
    g = nb.local_fraction(signal + dx, noise)
    assert g < f if noise.total_rate > 0 else g == f == 0.0


@given(st.floats(0.0, 1.0))
def test_ghz_budget_weaker(fraction):
    if nb.budget_check(fraction, "CHSH").passed:
        assert nb.budget_check(fraction, "GHZ").passed
