import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cosmicbell import cosmology as cosmo
from cosmicbell.cosmology import CosmologyParams

from oracles import simpson_comoving

P = CosmologyParams()


def test_default_params_are_flat():
    assert P.is_flat
    assert abs(P.omega_curvature) < 1e-6
    assert P.h == pytest.approx(0.673)


@pytest.mark.parametrize("kw", [{"hubble_constant": 0}, {"omega_matter": -0.1}, {"omega_radiation": -1e-5}])
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        CosmologyParams(**kw)


def test_hubble_today_is_h0():
    assert cosmo.hubble_rate(0.0, P) == pytest.approx(67.3 / 299792.458, rel=1e-12)


def test_hubble_ratio_at_z1():
    # mpmath (30 digits): sqrt(0.315*8 + OL + Or*16) with OL = 1 - Om - Or
    assert cosmo.hubble_rate(1.0, P) / cosmo.hubble_rate(0.0, P) == pytest.approx(1.7906367582510977, rel=1e-12)


def test_hubble_radiation_domination():
    z = 1e7
    ratio = cosmo.hubble_rate(z, P) / (P.hubble_inverse_mpc * (1 + z) ** 2)
    assert ratio == pytest.approx(math.sqrt(P.omega_radiation), rel=1e-3)


def test_hubble_errors():
    with pytest.raises(ValueError):
        cosmo.hubble_rate(-0.5, P)
    # OL = 2, Ok = -1: H^2 ~ 2 - (1+z)^2 turns negative beyond z = sqrt(2) - 1
    closed = CosmologyParams(omega_matter=0.0, omega_radiation=0.0, omega_lambda=2.0)
    assert cosmo.hubble_rate(0.2, closed) > 0
    with pytest.raises(ValueError):
        cosmo.hubble_rate(1.0, closed)


@given(st.floats(1.0, 200.0))
def test_unit_round_trip(h0):
    assert cosmo.inverse_mpc_to_hubble(cosmo.hubble_to_inverse_mpc(h0)) == pytest.approx(h0, rel=1e-15)


def test_comoving_distance_small_z():
    assert cosmo.comoving_distance(0.0, P) == 0.0
    z = 0.01
    assert cosmo.comoving_distance(z, P) == pytest.approx(z / P.hubble_inverse_mpc, rel=5e-3)


def test_comoving_distance_matches_simpson_at_threshold():
    assert cosmo.comoving_distance(3.65, P) == pytest.approx(simpson_comoving(3.65), rel=1e-8)


def test_conformal_half_age_at_antipodal_threshold():
    # mpmath quadrature: 0.5000701452815444
    assert cosmo.conformal_time(3.65, P) / cosmo.conformal_age(P) == pytest.approx(0.5000701452815444, rel=1e-7)


def test_conformal_age_value():
    # mpmath quadrature, Mpc
    assert cosmo.conformal_age(P) == pytest.approx(14165.54217237033, rel=1e-8)


@pytest.mark.parametrize("z", [0.5, 3.65, 1090.0])
def test_partition_identity(z):
    total = cosmo.conformal_time(z, P) + cosmo.comoving_distance(z, P)
    assert abs(total - cosmo.conformal_age(P)) / cosmo.conformal_age(P) < 1e-6


def test_conformal_time_tail():
    assert cosmo.conformal_time(math.inf, P) == 0.0
    assert cosmo.conformal_time(1e9, P) < 1e-3 * cosmo.conformal_age(P)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 3000.0), st.floats(0.0, 3000.0))
def test_monotonicity(z1, z2):
    z1, z2 = sorted((z1, z2))
    if z2 - z1 < 1e-3 * (1 + z1):
        return
    assert cosmo.comoving_distance(z1, P) < cosmo.comoving_distance(z2, P)
    assert cosmo.conformal_time(z1, P) > cosmo.conformal_time(z2, P)


def test_radiationless_model_warns():
    dust = CosmologyParams(omega_matter=1.0, omega_radiation=0.0)
    with pytest.warns(cosmo.NonphysicalAnchorWarning):
        eta = cosmo.conformal_time(0.0, dust)
    # Einstein-de Sitter: eta0 = 2 / H0
    assert eta == pytest.approx(2.0 / dust.hubble_inverse_mpc, rel=1e-7)


def test_lookback_and_age():
    age_gyr = cosmo.age_of_universe(P) / cosmo.SECONDS_PER_GYR
    assert 13.7 < age_gyr < 13.9
    assert cosmo.lookback_time(0.0, P) == 0.0
    assert cosmo.lookback_time(1000.0, P) == pytest.approx(cosmo.age_of_universe(P), rel=1e-4)


def test_nonflat_params_accepted_here():
    open_model = CosmologyParams(omega_matter=0.3, omega_radiation=9e-5, omega_lambda=0.6)
    assert not open_model.is_flat
    assert cosmo.comoving_distance(1.0, open_model) > 0


def test_thread_safety_is_value_identity():
    from concurrent.futures import ThreadPoolExecutor

    zs = np.linspace(0, 10, 32)
    with ThreadPoolExecutor(4) as ex:
        par = list(ex.map(lambda z: cosmo.comoving_distance(z, P), zs))
    assert par == [cosmo.comoving_distance(z, P) for z in zs]
