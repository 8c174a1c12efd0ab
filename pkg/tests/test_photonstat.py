import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import constants, stats

from cosmicbell import photonstat as ps
from cosmicbell.photonstat import LinkGeometry, SourceFlux, TelescopeConfig

mu_values = st.floats(0.0, 50.0)


def test_config_validation():
    with pytest.raises(ValueError):
        TelescopeConfig(0.0, 0.5)
    with pytest.raises(ValueError):
        TelescopeConfig(1.0, 1.5)
    with pytest.raises(ValueError):
        LinkGeometry(0.0)
    with pytest.raises(ValueError):
        LinkGeometry(50.0, -1e-9)
    with pytest.raises(ValueError):
        SourceFlux(-1.0)


def test_photon_rate():
    scope = TelescopeConfig(1.0, 0.5)
    assert ps.photon_rate(SourceFlux(0.0), scope) == 0.0
    assert ps.photon_rate(SourceFlux(2e4), scope) == pytest.approx(1.5708e4, rel=1e-4)
    big = TelescopeConfig(2.0, 0.5)
    assert ps.photon_rate(SourceFlux(2e4), big) == pytest.approx(4 * ps.photon_rate(SourceFlux(2e4), scope))


def test_timing_window():
    assert ps.C_M_S == constants.c
    assert ps.timing_window(LinkGeometry(50.0)).window == pytest.approx(1.668e-4, rel=1e-3)
    assert ps.timing_window(LinkGeometry(150.0)).window == pytest.approx(5.004e-4, rel=1e-3)
    for L in (50.0, 150.0):
        w = ps.timing_window(LinkGeometry(L, 78e-9))
        assert w.valid and w.slack > 0
    assert not ps.timing_window(LinkGeometry(50.0, 1e-3)).valid


def test_expected_detections():
    assert ps.expected_detections(0.0, 0.5, 1.0) == 0.0
    assert ps.expected_detections(1.5708e4, 0.5, 1.668e-4) == pytest.approx(1.310, abs=1e-3)
    assert ps.expected_detections(2.0, 0.5, 3.0) == pytest.approx(2 * ps.expected_detections(1.0, 0.5, 3.0))
    with pytest.raises(ValueError):
        ps.expected_detections(-1.0, 0.5, 1.0)


@given(mu_values)
def test_detection_probability_matches_poisson_sf(mu):
    assert ps.detection_probability(mu) == pytest.approx(stats.poisson.sf(0, mu), rel=1e-12, abs=1e-300)


def test_detection_probability_examples():
    assert ps.detection_probability(0.0) == 0.0
    assert ps.detection_probability(1e3) == pytest.approx(1.0)
    assert ps.detection_probability(1.310) == pytest.approx(0.730, abs=1e-3)
    with pytest.raises(ValueError):
        ps.detection_probability(-0.1)


@given(st.lists(mu_values, min_size=2, max_size=3))
def test_coincidence_bounds(mus):
    p = ps.coincidence_probability(mus)
    assert p <= min(ps.detection_probability(m) for m in mus) + 1e-15
    assert ps.coincidence_probability(mus[:1]) == ps.detection_probability(mus[0])
    if len(mus) == 3:
        assert p <= ps.coincidence_probability(mus[:2]) + 1e-15


def test_coincidence_examples():
    assert ps.coincidence_probability([1.3, 0.0]) == 0.0
    with pytest.raises(ValueError):
        ps.coincidence_probability([])
    p2 = ps.reference_geometry(2).coincidence([ps.REFERENCE_FLUX] * 2)
    p3 = ps.reference_geometry(3).coincidence([ps.REFERENCE_FLUX / 3] * 3)
    assert p2 == pytest.approx(0.53, abs=0.01)
    assert p3 == pytest.approx(0.38, abs=0.01)


def test_geometry_arm_count_mismatch():
    with pytest.raises(ValueError):
        ps.reference_geometry(2).mus([1.0, 2.0, 3.0])


def test_asymmetric_arms():
    g = ps.ExperimentGeometry((ps.Arm(TelescopeConfig(1.0, 0.5), LinkGeometry(50.0)),
                               ps.Arm(TelescopeConfig(1.0, 0.5), LinkGeometry(100.0))))
    m1, m2 = g.mus([2e4, 2e4])
    assert m2 == pytest.approx(2 * m1)


def test_runs_estimate():
    r = ps.runs_estimate(1e3, 900.0)
    assert r.expected == pytest.approx(9e5)
    assert ps.runs_estimate(0.0, 900.0).expected == 0.0
    one = ps.runs_estimate(1.0, 1.0)
    assert (one.expected, one.std) == (1.0, 1.0)


def test_scaling_low_flux():
    rep = ps.scaling_report(0.01, area_factor=0.5)
    assert rep.regime == "low-flux"
    assert rep.p2_ratio == pytest.approx(0.25, abs=0.01)
    assert rep.p3_ratio == pytest.approx(0.125, abs=0.01)


def test_scaling_saturated():
    rep = ps.scaling_report(1.310, area_factor=0.5)
    assert rep.regime == "saturated"
    ref = (-math.expm1(-0.655) / -math.expm1(-1.31)) ** 2
    assert rep.p2_ratio == pytest.approx(ref, rel=1e-12)
    assert rep.p2_ratio == pytest.approx(0.43, abs=0.01)


def test_scaling_identity_and_convergence():
    rep = ps.scaling_report(0.7, 1.0, 1.0)
    assert rep.p2_ratio == 1.0 and rep.p3_ratio == 1.0
    small = ps.scaling_report(1e-3, area_factor=0.5)
    assert small.p2_ratio == pytest.approx(small.p2_ratio_asymptotic, rel=0.01)
    assert small.p3_ratio == pytest.approx(small.p3_ratio_asymptotic, rel=0.01)
    with pytest.raises(ValueError):
        ps.scaling_report(1.0, area_factor=0.0)


@pytest.mark.parametrize("mus", [[1.31, 1.31], [0.9, 0.9, 0.9], [0.05, 2.0]])
def test_monte_carlo_agrees(mus):
    p_hat, sigma = ps.simulate_coincidences(mus, 10**6, seed=11)
    assert abs(p_hat - ps.coincidence_probability(mus)) < 3 * sigma
