"""FLRW background: Hubble rate, comoving distance and conformal time.

All distances are comoving Mpc in c = 1 units, so conformal time and
comoving distance share a unit and light rays run at 45 degrees in the
(distance, conformal time) plane. Conformal time is anchored at zero on the
a -> 0 surface of the radiation-including model (the hot big bang).

Integrals are done in the scale factor a = 1/(1+z), where

    dz / H(z) = da / (a^2 H(a)) = da / (H0 sqrt(Or + Om a + Ok a^2 + OL a^4))

is finite at a = 0 whenever Or > 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

from scipy import integrate

C_KM_S = 299792.458
MPC_KM = 3.0856775814913673e19
SECONDS_PER_GYR = 3.15576e16

QUAD_EPSREL = 1e-8
QUAD_EPSABS = 1e-12


class IntegrationError(RuntimeError):
    """Adaptive quadrature did not converge."""


class NonphysicalAnchorWarning(UserWarning):
    """Conformal time of a radiation-free model is not anchored to a hot big bang."""


@dataclass(frozen=True)
class CosmologyParams:
    """Background parameters of a FLRW model.

    ``omega_lambda`` defaults to ``1 - omega_matter - omega_radiation`` so the
    default model is exactly flat.
    """

    hubble_constant: float = 67.3  # km/s/Mpc
    omega_matter: float = 0.315
    omega_radiation: float = 9.2e-5
    omega_lambda: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.omega_lambda is None:
            object.__setattr__(self, "omega_lambda", 1.0 - self.omega_matter - self.omega_radiation)
        if not self.hubble_constant > 0:
            raise ValueError(f"hubble_constant must be positive, got {self.hubble_constant}")
        if self.omega_matter < 0:
            raise ValueError(f"omega_matter must be >= 0, got {self.omega_matter}")
        if self.omega_radiation < 0:
            raise ValueError(f"omega_radiation must be >= 0, got {self.omega_radiation}")

    @property
    def omega_curvature(self) -> float:
        return 1.0 - self.omega_matter - self.omega_lambda - self.omega_radiation

    @property
    def is_flat(self) -> bool:
        return abs(self.omega_curvature) < 1e-6

    @property
    def h(self) -> float:
        return self.hubble_constant / 100.0

    @property
    def hubble_inverse_mpc(self) -> float:
        """H0 in 1/Mpc (c = 1)."""
        return hubble_to_inverse_mpc(self.hubble_constant)

    def as_dict(self) -> dict:
        return {
            "hubble_constant_km_s_mpc": self.hubble_constant,
            "omega_matter": self.omega_matter,
            "omega_lambda": self.omega_lambda,
            "omega_radiation": self.omega_radiation,
            "omega_curvature": self.omega_curvature,
        }


DEFAULT_PARAMS = CosmologyParams()


@dataclass(frozen=True)
class ConformalCoordinate:
    conformal_time: float  # comoving Mpc
    comoving_distance: float  # comoving Mpc

    def __post_init__(self):
        if self.conformal_time < 0 or self.comoving_distance < 0:
            raise ValueError("conformal coordinates must be nonnegative")


def hubble_to_inverse_mpc(h0_km_s_mpc: float) -> float:
    return h0_km_s_mpc / C_KM_S


def inverse_mpc_to_hubble(h0_inv_mpc: float) -> float:
    return h0_inv_mpc * C_KM_S


def _check_z(z: float) -> float:
    z = float(z)
    if not z >= 0:
        raise ValueError(f"redshift must be >= 0, got {z}")
    return z


def _radicand_a(a: float, params: CosmologyParams) -> float:
    """a^4 (H/H0)^2 as a polynomial in the scale factor."""
    return (
        params.omega_radiation
        + params.omega_matter * a
        + params.omega_curvature * a * a
        + params.omega_lambda * a**4
    )


def hubble_rate(z: float, params: CosmologyParams = DEFAULT_PARAMS) -> float:
    """Expansion rate H(z) in 1/Mpc (c = 1 units)."""
    zp1 = 1.0 + _check_z(z)
    e2 = (
        params.omega_radiation * zp1**4
        + params.omega_matter * zp1**3
        + params.omega_curvature * zp1**2
        + params.omega_lambda
    )
    if e2 <= 0:
        raise ValueError(f"H(z)^2 <= 0 at z={z} for {params}")
    return params.hubble_inverse_mpc * math.sqrt(e2)


def _conformal_integrand(a: float, params: CosmologyParams) -> float:
    r = _radicand_a(a, params)
    if r <= 0:
        raise ValueError(f"H^2 <= 0 at a={a} for {params}")
    return 1.0 / (params.hubble_inverse_mpc * math.sqrt(r))


def _quad(func, lo, hi, params):
    if hi <= lo:
        return 0.0
    val, err, info, *rest = integrate.quad(
        func, lo, hi, args=(params,), epsrel=QUAD_EPSREL, epsabs=QUAD_EPSABS,
        limit=400, full_output=True,
    )
    if rest:
        raise IntegrationError(f"quad failed on [{lo}, {hi}]: {rest[0]}")
    return val


def comoving_distance(z: float, params: CosmologyParams = DEFAULT_PARAMS) -> float:
    """Line-of-sight comoving distance to redshift ``z`` in Mpc."""
    a = 1.0 / (1.0 + _check_z(z))
    return _quad(_conformal_integrand, a, 1.0, params)


def conformal_time(z: float, params: CosmologyParams = DEFAULT_PARAMS) -> float:
    """Conformal time elapsed since the hot big bang at redshift ``z``, in Mpc.

    A model with ``omega_radiation == 0`` still integrates (the integrand has
    an a^-1/2 singularity), but a warning is raised since there is no
    radiation era to anchor eta = 0.
    """
    z = _check_z(z)
    if params.omega_radiation == 0:
        warnings.warn(
            "omega_radiation = 0: conformal time is not anchored to a hot big bang",
            NonphysicalAnchorWarning,
            stacklevel=2,
        )
    if math.isinf(z):
        return 0.0
    return _conformal_age(params) if z == 0 else _quad(_conformal_integrand, 0.0, 1.0 / (1.0 + z), params)


@lru_cache(maxsize=64)
def _conformal_age(params: CosmologyParams) -> float:
    return _quad(_conformal_integrand, 0.0, 1.0, params)


def conformal_age(params: CosmologyParams = DEFAULT_PARAMS) -> float:
    """eta(0): conformal time today, equal to the comoving particle horizon."""
    return conformal_time(0.0, params)


def conformal_coordinate(z: float, params: CosmologyParams = DEFAULT_PARAMS) -> ConformalCoordinate:
    return ConformalCoordinate(conformal_time(z, params), comoving_distance(z, params))


def _lookback_integrand(a: float, params: CosmologyParams) -> float:
    return a * _conformal_integrand(a, params)


def lookback_time(z: float, params: CosmologyParams = DEFAULT_PARAMS) -> float:
    """Proper lookback time to redshift ``z`` in seconds."""
    a = 1.0 / (1.0 + _check_z(z))
    mpc = _quad(_lookback_integrand, a, 1.0, params)
    return mpc * MPC_KM / C_KM_S


def age_of_universe(params: CosmologyParams = DEFAULT_PARAMS) -> float:
    """Proper time since the hot big bang today, in seconds."""
    return _quad(_lookback_integrand, 0.0, 1.0, params) * MPC_KM / C_KM_S
