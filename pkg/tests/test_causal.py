import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.spatial.transform import Rotation

from cosmicbell import causal
from cosmicbell.causal import SkyPosition, SpacetimeEvent
from cosmicbell.cosmology import CosmologyParams, comoving_distance, conformal_age, conformal_time

from oracles import balls_intersect_bruteforce, great_circle_deg

P = CosmologyParams()

ras = st.floats(0.0, 359.999)
decs = st.floats(-90.0, 90.0)
positions = st.builds(SkyPosition, ras, decs)


def test_sky_position_validation():
    with pytest.raises(ValueError):
        SkyPosition(360.0, 0.0)
    with pytest.raises(ValueError):
        SkyPosition(10.0, 95.0)


@pytest.mark.parametrize(
    "p1, p2, expected",
    [
        ((12.0, 34.0), (12.0, 34.0), 0.0),
        ((0.0, 0.0), (180.0, 0.0), 180.0),
        ((0.0, 90.0), (123.0, 0.0), 90.0),
    ],
)
def test_angular_separation_examples(p1, p2, expected):
    assert causal.angular_separation(SkyPosition(*p1), SkyPosition(*p2)) == pytest.approx(expected, abs=1e-12)


@given(positions, positions)
def test_angular_separation_symmetric_and_bounded(p1, p2):
    a = causal.angular_separation(p1, p2)
    assert a == causal.angular_separation(p2, p1)
    assert 0.0 <= a <= 180.0


@given(positions, positions)
def test_angular_separation_matches_law_of_cosines(p1, p2):
    a = causal.angular_separation(p1, p2)
    assume(1.0 < a < 179.0)
    ref = great_circle_deg(p1.right_ascension, p1.declination, p2.right_ascension, p2.declination)
    assert a == pytest.approx(ref, abs=1e-7)


def test_emission_event_today_and_early():
    e = causal.emission_event(0.0, SkyPosition(10.0, 20.0), P)
    assert e.distance == 0.0
    assert e.conformal_time == pytest.approx(conformal_age(P))
    early = causal.emission_event(1e6, SkyPosition(10.0, 20.0), P)
    assert early.conformal_time < 1e-3 * conformal_age(P)
    assert early.distance == pytest.approx(conformal_age(P), rel=1e-3)


def test_emission_event_rejects_nonflat():
    with pytest.raises(ValueError):
        causal.emission_event(1.0, SkyPosition(0, 0), CosmologyParams(omega_lambda=0.6))


def test_antipodal_events_chord():
    e1 = causal.emission_event(3.65, SkyPosition(0.0, 0.0), P)
    e2 = causal.emission_event(3.65, SkyPosition(180.0, 0.0), P)
    assert np.linalg.norm(e1.position - e2.position) == pytest.approx(2 * comoving_distance(3.65, P), rel=1e-12)


def test_boundary_pair_has_zero_margins():
    z = causal.threshold_redshift(180.0, 2, P)
    ev = [causal.emission_event(z, SkyPosition(ra, 0.0), P) for ra in (0.0, 180.0)]
    v = causal.lightcones_disjoint(ev)
    assert abs(v.pairwise_margin[(0, 1)]) < 1e-2
    assert all(abs(m) < 1e-2 for m in v.earth_margin)


def test_same_direction_never_disjoint():
    pos = SkyPosition(45.0, 10.0)
    ev = [causal.emission_event(z, pos, P) for z in (4.0, 20.0)]
    v = causal.lightcones_disjoint(ev)
    assert not v.pairwise_disjoint[(0, 1)]
    assert not v.ok


def test_two_way_ground_example():
    ev = [causal.emission_event(4.2, SkyPosition(ra, 0.0), P) for ra in (0.0, 130.0)]
    v = causal.lightcones_disjoint(ev)
    assert v.pairwise_disjoint[(0, 1)]
    assert v.ok


def test_verdict_requires_events():
    with pytest.raises(ValueError):
        causal.lightcones_disjoint([])


@pytest.mark.parametrize(
    "alpha, n, z_table",
    [(180.0, 2, 3.65), (130.0, 2, 4.13), (120.0, 3, 4.37), (105.0, 3, 4.89)],
)
def test_threshold_table(alpha, n, z_table):
    assert causal.threshold_redshift(alpha, n, P) == pytest.approx(z_table, abs=0.10)


def test_threshold_frozen_values():
    # brentq on the chord condition with an mpmath-checked eta(z)
    assert causal.threshold_redshift(180.0, 2, P) == pytest.approx(3.65127, abs=2e-4)
    assert causal.threshold_redshift(130.0, 2, P) == pytest.approx(4.12965, abs=2e-4)
    assert causal.threshold_redshift(120.0, 3, P) == pytest.approx(4.37485, abs=2e-4)
    assert causal.threshold_redshift(105.0, 3, P) == pytest.approx(4.89627, abs=2e-4)


@pytest.mark.parametrize("alpha, n", [(180.0, 2), (150.0, 2), (130.0, 2), (120.0, 3), (105.0, 3), (90.0, 2)])
def test_threshold_plugs_back(alpha, n):
    z = causal.threshold_redshift(alpha, n, P)
    if n == 2:
        ev = [causal.emission_event(z, SkyPosition(r, 0.0), P) for r in (0.0, alpha)]
    else:
        # three directions mutually alpha apart, symmetric about the pole
        c = math.cos(math.radians(alpha))
        polar = math.acos(math.sqrt((1 + 2 * c) / 3))
        dec = 90.0 - math.degrees(polar)
        ev = [causal.emission_event(z, SkyPosition(r, dec), P) for r in (0.0, 120.0, 240.0)]
    v = causal.lightcones_disjoint(ev)
    assert abs(v.min_margin) < 1e-2  # comoving Mpc


def test_threshold_monotone_in_alpha():
    alphas = np.linspace(90.0, 180.0, 10)
    zs = [causal.threshold_redshift(a, 2, P) for a in alphas]
    assert all(a > b for a, b in zip(zs, zs[1:]))


def test_threshold_infeasible():
    with pytest.raises(causal.InfeasibleError):
        causal.threshold_redshift(0.0, 2, P)
    with pytest.raises(causal.InfeasibleError):
        causal.threshold_redshift(0.01, 2, P)
    with pytest.raises(ValueError):
        causal.threshold_redshift(130.0, 3, P)


@settings(max_examples=25, deadline=None)
@given(st.floats(3.0, 10.0))
def test_antipodal_pair_margin_twice_earth_margin(z):
    pair, earth = causal.symmetric_margin(z, 180.0, P)
    assert pair == pytest.approx(2 * earth, rel=1e-9, abs=1e-6)


def test_cmb_separation():
    a = causal.cmb_min_separation(P, 1090.0)
    assert a == pytest.approx(2.3, abs=0.2)
    assert a == pytest.approx(causal.cmb_min_separation_closed_form(P, 1090.0), abs=1e-3)


def test_cmb_separation_shrinks_with_redshift():
    a = [causal.cmb_min_separation(P, z) for z in (1090.0, 1e4, 1e6)]
    assert a[0] > a[1] > a[2]
    assert a[2] < 0.1


def _random_rotation(seed):
    return Rotation.random(random_state=seed)


@settings(max_examples=30, deadline=None)
@given(positions, positions, st.floats(2.0, 8.0), st.floats(2.0, 8.0), st.integers(0, 2**31 - 1))
def test_verdict_rotation_invariant(p1, p2, z1, z2, seed):
    rot = _random_rotation(seed)
    ev = [causal.emission_event(z1, p1, P), causal.emission_event(z2, p2, P)]
    q1 = SkyPosition.from_vector(rot.apply(p1.unit_vector()))
    q2 = SkyPosition.from_vector(rot.apply(p2.unit_vector()))
    ev_rot = [causal.emission_event(z1, q1, P), causal.emission_event(z2, q2, P)]
    v, w = causal.lightcones_disjoint(ev), causal.lightcones_disjoint(ev_rot)
    assert v.pairwise_margin[(0, 1)] == pytest.approx(w.pairwise_margin[(0, 1)], abs=1e-6)
    m = v.pairwise_margin[(0, 1)]
    if abs(m) > 1e-3:
        assert v.pairwise_disjoint == w.pairwise_disjoint


def test_bruteforce_ball_oracle_agrees():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 100:
        z = rng.uniform(1.0, 12.0, size=2)
        pos = [SkyPosition(rng.uniform(0, 360), math.degrees(math.asin(rng.uniform(-1, 1)))) for _ in range(2)]
        ev = [causal.emission_event(zi, p, P) for zi, p in zip(z, pos)]
        v = causal.lightcones_disjoint(ev)
        margin = v.pairwise_margin[(0, 1)]
        # sampling cannot resolve grazing contacts
        if abs(margin) < 0.02 * (ev[0].conformal_time + ev[1].conformal_time):
            continue
        hit = balls_intersect_bruteforce(ev[0].position, ev[0].conformal_time, ev[1].position, ev[1].conformal_time,
                                         rng=rng)
        assert hit == (not v.pairwise_disjoint[(0, 1)])
        checked += 1


def test_user_built_smart_source_event():
    # an early event y' on the common past of a quasar y and the entangled source S
    y = causal.emission_event(4.5, SkyPosition(0.0, 0.0), P)
    d = comoving_distance(20.0, P)
    y_prime = SpacetimeEvent(conformal_time(20.0, P), (d * 0.5, 0.0, 0.0))
    v = causal.lightcones_disjoint([y, y_prime])
    assert not v.ok


def test_verdict_json_shape():
    ev = [causal.emission_event(4.0, SkyPosition(ra, 0.0), P) for ra in (0.0, 180.0)]
    d = causal.lightcones_disjoint(ev).to_dict()
    assert d["disjoint"] is True
    assert d["pairwise"][0]["margin_mpc"] > 0
