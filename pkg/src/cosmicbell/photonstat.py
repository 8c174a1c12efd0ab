"""Photon-rate and coincidence arithmetic for cosmic setting triggers.

Photons from a source of flux F reach a telescope of diameter d at rate
r = F pi (d/2)^2; a detector of efficiency eta registers on average
mu = eta r dt of them in a window dt = L / c, and arrivals are Poisson, so
an arm fires with probability 1 - exp(-mu). Arms are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

C_M_S = 299_792_458.0


@dataclass(frozen=True)
class TelescopeConfig:
    diameter: float = 1.0  # m
    detector_efficiency: float = 0.5

    def __post_init__(self):
        if not self.diameter > 0:
            raise ValueError(f"diameter must be positive, got {self.diameter}")
        if not 0.0 <= self.detector_efficiency <= 1.0:
            raise ValueError(f"detector_efficiency must be in [0, 1], got {self.detector_efficiency}")

    @property
    def area(self) -> float:
        return math.pi * (self.diameter / 2.0) ** 2


@dataclass(frozen=True)
class LinkGeometry:
    baseline: float = 50.0  # km, source to detector
    setting_latency: float = 0.0  # s

    def __post_init__(self):
        if not self.baseline > 0:
            raise ValueError(f"baseline must be positive, got {self.baseline}")
        if self.setting_latency < 0:
            raise ValueError("setting_latency must be >= 0")


@dataclass(frozen=True)
class SourceFlux:
    flux: float  # photons s^-1 m^-2

    def __post_init__(self):
        if self.flux < 0:
            raise ValueError(f"flux must be >= 0, got {self.flux}")


@dataclass(frozen=True)
class TimingWindow:
    window: float  # s
    slack: float  # s, window minus setting latency

    @property
    def valid(self) -> bool:
        return self.slack >= 0


@dataclass(frozen=True)
class Arm:
    scope: TelescopeConfig = field(default_factory=TelescopeConfig)
    link: LinkGeometry = field(default_factory=LinkGeometry)


@dataclass(frozen=True)
class ExperimentGeometry:
    """Per-arm telescope and link configuration.

    A single arm is broadcast to any number of sources.
    """

    arms: tuple[Arm, ...] = (Arm(),)

    @classmethod
    def symmetric(cls, scope: TelescopeConfig, link: LinkGeometry, n_arms: int = 1) -> "ExperimentGeometry":
        return cls(tuple(Arm(scope, link) for _ in range(n_arms)))

    def arm(self, i: int) -> Arm:
        return self.arms[0] if len(self.arms) == 1 else self.arms[i]

    def mus(self, fluxes: Sequence[float]) -> list[float]:
        if len(self.arms) not in (1, len(fluxes)):
            raise ValueError(f"{len(self.arms)} arms configured for {len(fluxes)} sources")
        out = []
        for i, f in enumerate(fluxes):
            a = self.arm(i)
            r = photon_rate(SourceFlux(f), a.scope)
            out.append(expected_detections(r, a.scope.detector_efficiency, timing_window(a.link).window))
        return out

    def coincidence(self, fluxes: Sequence[float]) -> float:
        return coincidence_probability(self.mus(fluxes))


def photon_rate(flux: SourceFlux, scope: TelescopeConfig) -> float:
    """Photons per second collected by the aperture."""
    return flux.flux * scope.area


def timing_window(link: LinkGeometry) -> TimingWindow:
    window = link.baseline * 1e3 / C_M_S
    return TimingWindow(window, window - link.setting_latency)


def expected_detections(rate: float, efficiency: float, window: float) -> float:
    if rate < 0 or efficiency < 0 or window < 0:
        raise ValueError("rate, efficiency and window must be nonnegative")
    return efficiency * rate * window


def detection_probability(mu: float) -> float:
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    return -math.expm1(-mu)


def coincidence_probability(mus: Sequence[float]) -> float:
    """Probability that every arm registers at least one photon."""
    if len(mus) == 0:
        raise ValueError("need at least one arm")
    p = 1.0
    for mu in mus:
        p *= detection_probability(mu)
    return p


@dataclass(frozen=True)
class RunsEstimate:
    expected: float
    std: float


def runs_estimate(coincidence_rate: float, duration: float) -> RunsEstimate:
    if coincidence_rate < 0 or duration < 0:
        raise ValueError("rate and duration must be nonnegative")
    n = coincidence_rate * duration
    return RunsEstimate(n, math.sqrt(n))


def coincidence_rate(mus: Sequence[float], windows_per_second: float) -> float:
    """Triggered runs per second when windows are attempted back to back."""
    return coincidence_probability(mus) * windows_per_second


@dataclass
class ScalingReport:
    area_factor: float
    baseline_factor: float
    base_mus: list[float]
    scaled_mus: list[float]
    p2_base: float
    p2_scaled: float
    p3_base: float
    p3_scaled: float
    regime: str

    @property
    def p2_ratio(self) -> float:
        return self.p2_scaled / self.p2_base if self.p2_base > 0 else float("nan")

    @property
    def p3_ratio(self) -> float:
        return self.p3_scaled / self.p3_base if self.p3_base > 0 else float("nan")

    @property
    def p2_ratio_asymptotic(self) -> float:
        return (self.area_factor * self.baseline_factor) ** 2

    @property
    def p3_ratio_asymptotic(self) -> float:
        return (self.area_factor * self.baseline_factor) ** 3

    def to_dict(self) -> dict:
        return {
            "area_factor": self.area_factor,
            "baseline_factor": self.baseline_factor,
            "base_mus": self.base_mus,
            "scaled_mus": self.scaled_mus,
            "p2_base": self.p2_base,
            "p2_scaled": self.p2_scaled,
            "p2_ratio_exact": self.p2_ratio,
            "p2_ratio_low_flux": self.p2_ratio_asymptotic,
            "p3_base": self.p3_base,
            "p3_scaled": self.p3_scaled,
            "p3_ratio_exact": self.p3_ratio,
            "p3_ratio_low_flux": self.p3_ratio_asymptotic,
            "regime": self.regime,
        }


LOW_FLUX_MU = 0.05


def scaling_report(base_mu: float | Sequence[float], area_factor: float = 1.0, baseline_factor: float = 1.0) -> ScalingReport:
    """Effect of scaling collecting area and baseline on P2 and P3.

    ``base_mu`` is either one per-arm mean (applied to all arms) or a list of
    three means; P2 uses the first two. Both factors multiply mu linearly
    (area through r, baseline through dt). The low-flux ratios A^2, A^3 hold
    only for mu << 1; ``regime`` says which applies.
    """
    if area_factor <= 0 or baseline_factor <= 0:
        raise ValueError("scaling factors must be positive")
    mus = [float(base_mu)] * 3 if np.isscalar(base_mu) else [float(m) for m in base_mu]
    if len(mus) == 2:
        mus.append(mus[-1])
    if len(mus) != 3:
        raise ValueError("base_mu must be a scalar or 2-3 per-arm means")
    k = area_factor * baseline_factor
    scaled = [m * k for m in mus]
    regime = "low-flux" if max(mus + scaled) < LOW_FLUX_MU else "saturated"
    return ScalingReport(
        area_factor, baseline_factor, mus, scaled,
        coincidence_probability(mus[:2]), coincidence_probability(scaled[:2]),
        coincidence_probability(mus), coincidence_probability(scaled),
        regime,
    )


def simulate_coincidences(mus: Sequence[float], n_windows: int, seed=None) -> tuple[float, float]:
    """Monte Carlo coincidence fraction and its binomial standard error.

    Each arm draws a Poisson count per window; a window counts if all arms
    saw at least one photon.
    """
    rng = np.random.default_rng(seed)
    hit = np.ones(n_windows, dtype=bool)
    for mu in mus:
        hit &= rng.poisson(mu, size=n_windows) > 0
    p = hit.mean()
    p_true = coincidence_probability(mus)
    return float(p), math.sqrt(p_true * (1 - p_true) / n_windows)


def reference_geometry(n_arms: int = 2) -> ExperimentGeometry:
    """d = 1 m, efficiency 0.5; 50 km baselines for 2 arms, 150 km for 3."""
    baseline = 50.0 if n_arms == 2 else 150.0
    return ExperimentGeometry.symmetric(TelescopeConfig(1.0, 0.5), LinkGeometry(baseline), n_arms)


REFERENCE_FLUX = 2e4  # photons s^-1 m^-2, bright z ~ 4 quasar
