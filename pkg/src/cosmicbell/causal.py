"""Light-cone independence of cosmic emission events in flat FLRW.

In comoving coordinates with c = 1, the past light cone of an event at
(eta_i, x_i) is, at conformal time eta, a ball of radius eta_i - eta about x_i.
On the hot big bang surface eta = 0 it is a ball of radius eta_i, so

* two cones never overlap after the big bang iff |x_i - x_j| >= eta_i + eta_j,
* a cone never meets Earth's worldline (the origin) iff eta_i <= |x_i| = d_i.

The second condition is binding only for near-antipodal sources; at
180 degrees both reduce to d(z) = eta(z).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .cosmology import (
    DEFAULT_PARAMS,
    CosmologyParams,
    comoving_distance,
    conformal_time,
)

Z_SEARCH_MAX = 1e4
Z_TOL = 1e-4
ALPHA_TOL_DEG = 1e-3


class InfeasibleError(ValueError):
    """No redshift in the search range satisfies the causal constraints."""


@dataclass(frozen=True)
class SkyPosition:
    right_ascension: float  # degrees, [0, 360)
    declination: float  # degrees, [-90, 90]

    def __post_init__(self):
        if not (0.0 <= self.right_ascension < 360.0):
            raise ValueError(f"right ascension {self.right_ascension} outside [0, 360)")
        if not (-90.0 <= self.declination <= 90.0):
            raise ValueError(f"declination {self.declination} outside [-90, 90]")

    def unit_vector(self) -> np.ndarray:
        ra, dec = math.radians(self.right_ascension), math.radians(self.declination)
        return np.array([math.cos(dec) * math.cos(ra), math.cos(dec) * math.sin(ra), math.sin(dec)])

    @classmethod
    def from_vector(cls, v) -> "SkyPosition":
        x, y, z = (float(c) for c in v)
        ra = math.degrees(math.atan2(y, x)) % 360.0
        if ra >= 360.0:
            ra = 0.0
        dec = math.degrees(math.atan2(z, math.hypot(x, y)))
        return cls(ra, min(90.0, max(-90.0, dec)))


@dataclass(frozen=True)
class SpacetimeEvent:
    conformal_time: float  # Mpc
    comoving_position: tuple[float, float, float]  # Mpc, Earth at origin
    label: str = ""

    def __post_init__(self):
        if self.conformal_time < 0:
            raise ValueError("conformal_time must be >= 0")
        object.__setattr__(self, "comoving_position", tuple(float(c) for c in self.comoving_position))

    @property
    def position(self) -> np.ndarray:
        return np.asarray(self.comoving_position)

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(self.position))


@dataclass
class CausalVerdict:
    """Per-constraint outcome; margins in comoving Mpc, positive when satisfied."""

    earth_disjoint: list[bool]
    earth_margin: list[float]
    pairwise_disjoint: dict[tuple[int, int], bool] = field(default_factory=dict)
    pairwise_margin: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.earth_disjoint) and all(self.pairwise_disjoint.values())

    @property
    def min_margin(self) -> float:
        return min(list(self.earth_margin) + list(self.pairwise_margin.values()))

    def to_dict(self) -> dict:
        return {
            "disjoint": self.ok,
            "earth_disjoint": list(self.earth_disjoint),
            "earth_margin_mpc": list(self.earth_margin),
            "pairwise": [
                {"i": i, "j": j, "disjoint": self.pairwise_disjoint[(i, j)],
                 "margin_mpc": self.pairwise_margin[(i, j)]}
                for (i, j) in sorted(self.pairwise_margin)
            ],
        }


def angular_separation(p1: SkyPosition, p2: SkyPosition) -> float:
    """Great-circle separation in degrees (Vincenty form, stable at 0 and 180)."""
    # fixed argument order makes the result bitwise symmetric
    if (p2.right_ascension, p2.declination) < (p1.right_ascension, p1.declination):
        p1, p2 = p2, p1
    ra1, dec1 = math.radians(p1.right_ascension), math.radians(p1.declination)
    ra2, dec2 = math.radians(p2.right_ascension), math.radians(p2.declination)
    dra = ra2 - ra1
    sd1, cd1 = math.sin(dec1), math.cos(dec1)
    sd2, cd2 = math.sin(dec2), math.cos(dec2)
    num = math.hypot(cd2 * math.sin(dra), cd1 * sd2 - sd1 * cd2 * math.cos(dra))
    den = sd1 * sd2 + cd1 * cd2 * math.cos(dra)
    return math.degrees(math.atan2(num, den))


def emission_event(
    z: float, position: SkyPosition, params: CosmologyParams = DEFAULT_PARAMS, label: str = ""
) -> SpacetimeEvent:
    """Event at which light now reaching Earth from ``position`` left redshift ``z``."""
    _require_flat(params)
    d = comoving_distance(z, params)
    return SpacetimeEvent(conformal_time(z, params), tuple(d * position.unit_vector()), label)


def _require_flat(params: CosmologyParams):
    if not params.is_flat:
        raise ValueError(f"causal geometry requires a flat model, got omega_k={params.omega_curvature:.3g}")


def lightcones_disjoint(events: list[SpacetimeEvent]) -> CausalVerdict:
    if not events:
        raise ValueError("need at least one event")
    earth_margin = [e.distance - e.conformal_time for e in events]
    verdict = CausalVerdict(
        earth_disjoint=[m >= 0 for m in earth_margin],
        earth_margin=earth_margin,
    )
    for i, j in itertools.combinations(range(len(events)), 2):
        sep = float(np.linalg.norm(events[i].position - events[j].position))
        m = sep - (events[i].conformal_time + events[j].conformal_time)
        verdict.pairwise_margin[(i, j)] = m
        verdict.pairwise_disjoint[(i, j)] = m >= 0
    return verdict


def chord_distance(d1: float, d2: float, alpha_deg: float) -> float:
    """Comoving separation of two points at distances d1, d2 and angle alpha."""
    c = math.cos(math.radians(alpha_deg))
    return math.sqrt(max(0.0, d1 * d1 + d2 * d2 - 2.0 * d1 * d2 * c))


def symmetric_margin(z: float, alpha_deg: float, params: CosmologyParams = DEFAULT_PARAMS) -> tuple[float, float]:
    """(pairwise, earth) margins for sources at common redshift ``z`` separated by ``alpha``."""
    d = comoving_distance(z, params)
    eta = conformal_time(z, params)
    return chord_distance(d, d, alpha_deg) - 2.0 * eta, d - eta


def threshold_redshift(alpha: float, n_sources: int = 2, params: CosmologyParams = DEFAULT_PARAMS) -> float:
    """Smallest common redshift at which ``n_sources`` mutually ``alpha`` apart are independent.

    Raises InfeasibleError when no root exists in (0, 1e4].
    """
    _require_flat(params)
    if n_sources not in (2, 3):
        raise ValueError("n_sources must be 2 or 3")
    if not 0 <= alpha <= 180:
        raise ValueError(f"alpha must be in (0, 180], got {alpha}")
    if alpha == 0:
        raise InfeasibleError("alpha=0: coincident sight lines never decouple")
    if n_sources == 3 and alpha > 120:
        raise ValueError("three sources cannot be mutually separated by more than 120 degrees")

    def margin(z):
        pair, earth = symmetric_margin(z, alpha, params)
        return min(pair, earth)

    if margin(Z_SEARCH_MAX) < 0:
        raise InfeasibleError(f"alpha={alpha} deg: no threshold redshift below z={Z_SEARCH_MAX:g}")
    # margins move ~1e3 Mpc per unit z near threshold; 1e-8 keeps them < 1e-2 Mpc
    return optimize.brentq(margin, 0.0, Z_SEARCH_MAX, xtol=Z_TOL * 1e-4, rtol=4 * np.finfo(float).eps)


def cmb_min_separation(params: CosmologyParams = DEFAULT_PARAMS, z_cmb: float = 1090.0) -> float:
    """Smallest angle between two last-scattering patches with disjoint past light cones."""
    _require_flat(params)
    d = comoving_distance(z_cmb, params)
    eta = conformal_time(z_cmb, params)
    if eta > d:
        raise InfeasibleError(f"z={z_cmb}: even antipodal patches share causal past")
    return optimize.bisect(
        lambda a: chord_distance(d, d, a) - 2.0 * eta, 0.0, 180.0, xtol=ALPHA_TOL_DEG / 4
    )


def cmb_min_separation_closed_form(params: CosmologyParams = DEFAULT_PARAMS, z_cmb: float = 1090.0) -> float:
    """sin(alpha/2) = eta / d."""
    return math.degrees(2.0 * math.asin(conformal_time(z_cmb, params) / comoving_distance(z_cmb, params)))

