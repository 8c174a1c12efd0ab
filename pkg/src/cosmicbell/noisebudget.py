"""Noise-loophole accounting for locally generated setting triggers.

A trigger of local origin (sky glow, light pollution, zodiacal light,
scattered starlight, dark counts) is a setting a hidden-variable model could
have arranged. The fraction of such triggers is held to the same budgets as
the settings/hidden-variable mutual information: 0.046 for CHSH, 0.415 for
GHZ. The budget is applied to each setting stream separately.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bellsim import CHSH_MI_THRESHOLD, GHZ_MI_THRESHOLD

THRESHOLDS = {"CHSH": CHSH_MI_THRESHOLD, "GHZ": GHZ_MI_THRESHOLD}


@dataclass(frozen=True)
class NoiseModel:
    background_rate: float = 0.0  # events/s, measured on a dark patch near the source
    dark_count_rate: float = 0.0  # events/s

    def __post_init__(self):
        if self.background_rate < 0 or self.dark_count_rate < 0:
            raise ValueError("noise rates must be >= 0")

    @property
    def total_rate(self) -> float:
        return self.background_rate + self.dark_count_rate


@dataclass(frozen=True)
class BudgetVerdict:
    test_kind: str
    fraction: float
    threshold: float

    @property
    def passed(self) -> bool:
        # strict: a fraction sitting on the limit fails
        return self.fraction < self.threshold

    @property
    def margin(self) -> float:
        return self.threshold - self.fraction

    def to_dict(self) -> dict:
        return {"test_kind": self.test_kind, "local_fraction": self.fraction,
                "threshold": self.threshold, "passed": self.passed, "margin": self.margin}


def local_fraction(signal_rate: float, noise: NoiseModel) -> float:
    """Probability that a setting trigger came from a local rather than cosmic photon."""
    if signal_rate < 0:
        raise ValueError("signal_rate must be >= 0")
    total = signal_rate + noise.total_rate
    if total <= 0:
        raise ValueError("total trigger rate is zero")
    return noise.total_rate / total


def budget_check(fraction: float, test_kind: str = "CHSH") -> BudgetVerdict:
    kind = test_kind.upper()
    if kind not in THRESHOLDS:
        raise ValueError(f"test_kind must be CHSH or GHZ, got {test_kind!r}")
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    return BudgetVerdict(kind, fraction, THRESHOLDS[kind])
