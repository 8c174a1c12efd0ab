"""Monte Carlo CHSH and GHZ (Mermin) tests with cosmic setting sources.

Settings are binary per detector. For CHSH setting 0/1 at detector 1 selects
analyzer angle a/a', at detector 2 b/b'; angles are given as (a, a', b, b').
For GHZ setting 0/1 selects the X/Y basis.

Sign conventions:

    S = E(a,b) - E(a,b') + E(a',b) + E(a',b')
    M = <XXX> - <XYY> - <YXY> - <YYX>

The polarization singlet has E = -cos 2(theta_a - theta_b), so at the
canonical angles (0, 45, 22.5, 67.5) deg it gives S = -2 sqrt 2, while the
classical and conspiracy models here are oriented to S = +2 and +4. The
CHSH inequality bounds |S|; ``BellStatistics.violation`` is |S|.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

CHSH_MI_THRESHOLD = 0.046  # bits; ~1/22
GHZ_MI_THRESHOLD = 0.415  # bits

CANONICAL_CHSH_ANGLES = tuple(math.radians(a) for a in (0.0, 45.0, 22.5, 67.5))
TSIRELSON = 2.0 * math.sqrt(2.0)
MIN_AUDIT_TRIALS = 10_000


class SettingSourceTag(enum.IntEnum):
    COSMIC = 0
    LOCAL_NOISE = 1
    FALLBACK = 2


@dataclass
class TrialRecords:
    settings: np.ndarray  # (n, k) uint8
    outcomes: np.ndarray  # (n, k) int8, +-1
    tags: np.ndarray  # (n, k) uint8, SettingSourceTag
    hidden_state: np.ndarray  # (n,) int64

    def __post_init__(self):
        self.settings = np.asarray(self.settings, dtype=np.uint8)
        self.outcomes = np.asarray(self.outcomes, dtype=np.int8)
        self.tags = np.asarray(self.tags, dtype=np.uint8)
        self.hidden_state = np.asarray(self.hidden_state, dtype=np.int64)
        n, k = self.settings.shape
        if self.outcomes.shape != (n, k) or self.tags.shape != (n, k) or self.hidden_state.shape != (n,):
            raise ValueError("inconsistent record shapes")
        if n and (self.settings.max() > 1 or not np.all(np.abs(self.outcomes) == 1)):
            raise ValueError("settings must be 0/1 and outcomes +-1")

    def __len__(self):
        return self.settings.shape[0]

    @property
    def n_detectors(self) -> int:
        return self.settings.shape[1]

    def subset(self, mask) -> "TrialRecords":
        return TrialRecords(self.settings[mask], self.outcomes[mask], self.tags[mask], self.hidden_state[mask])

    def settings_code(self) -> np.ndarray:
        weights = 1 << np.arange(self.n_detectors)
        return self.settings.astype(np.int64) @ weights

    def save(self, path):
        k = self.n_detectors
        header = ",".join(
            [f"setting{i}" for i in range(1, k + 1)]
            + [f"outcome{i}" for i in range(1, k + 1)]
            + [f"tag{i}" for i in range(1, k + 1)]
            + ["hidden_state"]
        )
        table = np.column_stack([self.settings, self.outcomes, self.tags, self.hidden_state]).astype(np.int64)
        np.savetxt(path, table, fmt="%d", delimiter=",", header=header, comments="")

    @classmethod
    def load(cls, path) -> "TrialRecords":
        header = Path(path).open(encoding="utf-8").readline().strip().split(",")
        k = (len(header) - 1) // 3
        table = np.loadtxt(path, dtype=np.int64, delimiter=",", skiprows=1, ndmin=2).reshape(-1, 3 * k + 1)
        return cls(table[:, :k], table[:, k:2 * k], table[:, 2 * k:3 * k], table[:, -1])


# --- setting sources -------------------------------------------------------

class FairCoins:
    """Independent fair coins from the fallback generator."""

    def draw(self, n, k, rng):
        return rng.integers(0, 2, size=(n, k), dtype=np.uint8), np.full((n, k), SettingSourceTag.FALLBACK, np.uint8)


@dataclass
class Bitstreams:
    """One SettingBitstream per detector; bit i sets trial i.

    Trials beyond the end of a stream fall back to fair coins.
    """

    streams: Sequence

    def draw(self, n, k, rng):
        if len(self.streams) != k:
            raise ValueError(f"need {k} bitstreams, got {len(self.streams)}")
        settings, tags = FairCoins().draw(n, k, rng)
        for d, s in enumerate(self.streams):
            bits = np.asarray(getattr(s, "bits", s), dtype=np.uint8)[:n]
            settings[: bits.size, d] = bits
            tags[: bits.size, d] = SettingSourceTag.COSMIC
        return settings, tags


@dataclass
class TriggeredCoins:
    """Each detector is triggered by its cosmic source with some probability.

    Triggered settings are tagged cosmic, except a ``local_fraction`` of them
    which came from local photons; untriggered ones use the fallback.
    Settings themselves are fair coins either way.
    """

    cosmic_probability: float | Sequence[float]
    local_fraction: float = 0.0

    def draw(self, n, k, rng):
        p = np.broadcast_to(np.asarray(self.cosmic_probability, dtype=float), (k,))
        settings = rng.integers(0, 2, size=(n, k), dtype=np.uint8)
        triggered = rng.random((n, k)) < p
        local = rng.random((n, k)) < self.local_fraction
        tags = np.where(triggered, np.where(local, SettingSourceTag.LOCAL_NOISE, SettingSourceTag.COSMIC),
                        SettingSourceTag.FALLBACK).astype(np.uint8)
        return settings, tags


@dataclass
class FixedSettings:
    settings: np.ndarray
    tags: np.ndarray | None = None

    def draw(self, n, k, rng):
        s = np.asarray(self.settings, dtype=np.uint8)
        if s.shape != (n, k):
            raise ValueError(f"fixed settings have shape {s.shape}, expected {(n, k)}")
        t = np.full((n, k), SettingSourceTag.COSMIC, np.uint8) if self.tags is None else np.asarray(self.tags, np.uint8)
        return s, t


# --- models ----------------------------------------------------------------

@dataclass(frozen=True)
class QuantumSinglet:
    name: str = "quantum_singlet"

    def sample(self, settings, rng, angles):
        if len(angles) != 4:
            raise ValueError("CHSH needs four analyzer angles (a, a', b, b')")
        angles = np.asarray(angles, dtype=float)
        ta = angles[settings[:, 0]]
        tb = angles[2 + settings[:, 1]]
        corr = -np.cos(2.0 * (ta - tb))
        a = np.where(rng.random(len(settings)) < 0.5, 1, -1).astype(np.int8)
        same = rng.random(len(settings)) < 0.5 * (1.0 + corr)
        b = np.where(same, a, -a).astype(np.int8)
        return np.column_stack([a, b]), np.zeros(len(settings), np.int64)


def _ghz_target(settings):
    """Product of outcomes demanded by the GHZ state; 0 where it is uncorrelated."""
    n_y = settings.sum(axis=1)
    return np.select([n_y == 0, n_y == 2], [1, -1], 0)


@dataclass(frozen=True)
class QuantumGHZ:
    name: str = "quantum_ghz"

    def sample(self, settings, rng, angles=None):
        n = len(settings)
        out = np.where(rng.random((n, 3)) < 0.5, 1, -1).astype(np.int8)
        target = _ghz_target(settings)
        fixed = target != 0
        out[fixed, 2] = (target[fixed] * out[fixed, 0] * out[fixed, 1]).astype(np.int8)
        return out, np.zeros(n, np.int64)


@dataclass(frozen=True, eq=False)
class DeterministicLHV:
    """Mixture of local deterministic strategies.

    ``strategies[j, d, s]`` is detector d's outcome under setting s in
    strategy j; strategy j is drawn with probability ``weights[j]``
    independently of the settings.
    """

    strategies: np.ndarray
    weights: np.ndarray | None = None
    name: str = "deterministic_lhv"

    def __post_init__(self):
        s = np.asarray(self.strategies, dtype=np.int8)
        if s.ndim != 3 or s.shape[2] != 2 or not np.all(np.abs(s) == 1):
            raise ValueError("strategies must have shape (m, k, 2) with entries +-1")
        object.__setattr__(self, "strategies", s)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (s.shape[0],) or np.any(w < 0) or not w.sum() > 0:
                raise ValueError("weights must be nonnegative, one per strategy")
            object.__setattr__(self, "weights", w / w.sum())

    @property
    def n_detectors(self) -> int:
        return self.strategies.shape[1]

    def draw_strategy(self, n, rng):
        return rng.choice(self.strategies.shape[0], size=n, p=self.weights)

    def outcomes_for(self, idx, settings):
        k = self.n_detectors
        return self.strategies[idx[:, None], np.arange(k)[None, :], settings]

    def sample(self, settings, rng, angles=None):
        if settings.shape[1] != self.n_detectors:
            raise ValueError("strategy table does not match detector count")
        idx = self.draw_strategy(len(settings), rng)
        return self.outcomes_for(idx, settings), idx.astype(np.int64)

    @classmethod
    def best(cls, n_detectors: int) -> "DeterministicLHV":
        """A single strategy attaining the local bound (S = 2 or M = 2)."""
        stat = _chsh_of_strategy if n_detectors == 2 else _mermin_of_strategy
        best = max(all_strategies(n_detectors), key=lambda s: (stat(s), s.tobytes()))
        return cls(best[None])

    @classmethod
    def random(cls, n_detectors: int, n_strategies: int, rng) -> "DeterministicLHV":
        strategies = np.where(rng.random((n_strategies, n_detectors, 2)) < 0.5, 1, -1)
        return cls(strategies, rng.random(n_strategies) + 1e-3)


def all_strategies(n_detectors: int):
    for bits in itertools.product((1, -1), repeat=2 * n_detectors):
        yield np.array(bits, dtype=np.int8).reshape(n_detectors, 2)


def _chsh_of_strategy(s):
    e = lambda x, y: int(s[0, x]) * int(s[1, y])  # noqa: E731
    return e(0, 0) - e(0, 1) + e(1, 0) + e(1, 1)


def _mermin_of_strategy(s):
    e = lambda p, q, r: int(s[0, p]) * int(s[1, q]) * int(s[2, r])  # noqa: E731
    return e(0, 0, 0) - e(0, 1, 1) - e(1, 0, 1) - e(1, 1, 0)


@dataclass(frozen=True)
class Conspiracy:
    """Setting-correlated hidden variables.

    With probability ``f`` per run the hidden variable is prepared knowing
    every setting of that run and produces the algebraically optimal outcomes
    (each CHSH/Mermin term contributes its maximum); otherwise the run plays
    ``fallback`` (the best local strategy). Expected S = M = 2 + 2f.

    Hidden-state ids: fallback strategy index j, or n_strategies + settings
    code when the conspiracy is active.
    """

    f: float
    fallback: DeterministicLHV | None = None
    name: str = "conspiracy"

    def __post_init__(self):
        if not 0.0 <= self.f <= 1.0:
            raise ValueError(f"conspiracy fraction must be in [0, 1], got {self.f}")

    def sample(self, settings, rng, angles=None):
        n, k = settings.shape
        lhv = self.fallback if self.fallback is not None else DeterministicLHV.best(k)
        idx = lhv.draw_strategy(n, rng)
        out = lhv.outcomes_for(idx, settings).astype(np.int8)
        hidden = idx.astype(np.int64)

        active = rng.random(n) < self.f
        if k == 2:
            target = np.where((settings[:, 0] == 0) & (settings[:, 1] == 1), -1, 1)
        else:
            target = _ghz_target(settings)
            target[target == 0] = 1
        opt = np.ones((n, k), np.int8)
        opt[:, -1] = target
        out[active] = opt[active]
        code = settings.astype(np.int64) @ (1 << np.arange(k))
        hidden[active] = lhv.strategies.shape[0] + code[active]
        return out, hidden

    def analytic_mutual_information(self, n_detectors: int) -> float:
        """I(settings; hidden) for uniform independent settings: f * k bits."""
        return self.f * n_detectors


def conspiracy_model(f: float, fallback: DeterministicLHV | None = None) -> Conspiracy:
    return Conspiracy(f, fallback)


# --- statistics ------------------------------------------------------------

@dataclass
class BellStatistics:
    correlators: dict[tuple[int, int], float]
    counts: dict[tuple[int, int], int]
    s: float
    standard_error: float
    n_trials: int

    @property
    def violation(self) -> float:
        return abs(self.s)

    def correlator_errors(self) -> dict[tuple[int, int], float]:
        return {xy: _binomial_se(e, self.counts[xy]) for xy, e in self.correlators.items()}

    def to_dict(self) -> dict:
        return {
            "S": self.s,
            "abs_S": self.violation,
            "standard_error": self.standard_error,
            "n_trials": self.n_trials,
            "correlators": {f"E{x}{y}": e for (x, y), e in sorted(self.correlators.items())},
            "counts": {f"N{x}{y}": c for (x, y), c in sorted(self.counts.items())},
        }


@dataclass
class MerminStatistics:
    correlators: dict[str, float]
    counts: dict[str, int]
    m: float
    standard_error: float
    n_trials: int

    @property
    def violation(self) -> float:
        return abs(self.m)

    def to_dict(self) -> dict:
        return {
            "M": self.m,
            "standard_error": self.standard_error,
            "n_trials": self.n_trials,
            "correlators": dict(self.correlators),
            "counts": dict(self.counts),
        }


def _binomial_se(e, n):
    if n == 0 or not math.isfinite(e):
        return math.nan
    return math.sqrt(max(0.0, 1.0 - e * e) / n)


def _correlator(records: TrialRecords, pattern) -> tuple[float, int]:
    mask = np.all(records.settings == np.asarray(pattern, np.uint8), axis=1)
    n = int(mask.sum())
    if n == 0:
        return math.nan, 0
    # integer sum: exact, so independent of reduction order
    prod = np.prod(records.outcomes[mask].astype(np.int64), axis=1)
    return int(prod.sum()) / n, n


CHSH_SIGNS = {(0, 0): 1, (0, 1): -1, (1, 0): 1, (1, 1): 1}
MERMIN_TERMS = {"XXX": ((0, 0, 0), 1), "XYY": ((0, 1, 1), -1), "YXY": ((1, 0, 1), -1), "YYX": ((1, 1, 0), -1)}


def chsh_statistics(records: TrialRecords) -> BellStatistics:
    if records.n_detectors != 2:
        raise ValueError("CHSH statistics need two detectors")
    corr, counts = {}, {}
    s, var = 0.0, 0.0
    for xy, sign in CHSH_SIGNS.items():
        e, n = _correlator(records, xy)
        corr[xy], counts[xy] = e, n
        s += sign * e
        var += _binomial_se(e, n) ** 2
    return BellStatistics(corr, counts, s, math.sqrt(var), len(records))


def mermin_statistics(records: TrialRecords) -> MerminStatistics:
    if records.n_detectors != 3:
        raise ValueError("Mermin statistics need three detectors")
    corr, counts = {}, {}
    m, var = 0.0, 0.0
    for name, (pattern, sign) in MERMIN_TERMS.items():
        e, n = _correlator(records, pattern)
        corr[name], counts[name] = e, n
        m += sign * e
        var += _binomial_se(e, n) ** 2
    return MerminStatistics(corr, counts, m, math.sqrt(var), len(records))


def _simulate(model, n_detectors, n_trials, setting_source, angles, seed):
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    rng = np.random.default_rng(seed)
    source = setting_source if setting_source is not None else FairCoins()
    settings, tags = source.draw(n_trials, n_detectors, rng)
    outcomes, hidden = model.sample(settings, rng, angles)
    return TrialRecords(settings, outcomes, tags, hidden)


def run_chsh(model, setting_source=None, angles=CANONICAL_CHSH_ANGLES, n_trials: int = 100_000, seed=None):
    """Simulate a two-detector CHSH experiment; returns (BellStatistics, TrialRecords)."""
    if isinstance(model, QuantumGHZ) or getattr(model, "n_detectors", 2) != 2:
        raise ValueError(f"model {model.name} is not a two-detector model")
    records = _simulate(model, 2, n_trials, setting_source, angles, seed)
    return chsh_statistics(records), records


def run_ghz(model, n_trials: int = 100_000, seed=None, setting_source=None):
    """Simulate a three-detector GHZ/Mermin experiment; returns (MerminStatistics, TrialRecords)."""
    if isinstance(model, QuantumSinglet) or getattr(model, "n_detectors", 3) != 3:
        raise ValueError(f"model {model.name} is not a three-detector model")
    records = _simulate(model, 3, n_trials, setting_source, None, seed)
    return mermin_statistics(records), records


def make_model(name: str, n_detectors: int, f: float = 0.0):
    name = name.replace("-", "_")
    if name in ("quantum", "quantum_singlet", "quantum_ghz"):
        return QuantumSinglet() if n_detectors == 2 else QuantumGHZ()
    if name in ("lhv", "deterministic_lhv"):
        return DeterministicLHV.best(n_detectors)
    if name == "conspiracy":
        return conspiracy_model(f)
    raise ValueError(f"unknown model {name!r}")


# --- mutual information ----------------------------------------------------

@dataclass
class MutualInfoBudget:
    measured_bits: float
    threshold_bits: float
    bias_bound_bits: float
    n_trials: int
    analytic_bits: float | None = None

    @property
    def exceeds_threshold(self) -> bool:
        return self.measured_bits > self.threshold_bits

    @property
    def gap_bits(self) -> float:
        return self.measured_bits - self.threshold_bits

    def to_dict(self) -> dict:
        return {
            "measured_bits": self.measured_bits,
            "threshold_bits": self.threshold_bits,
            "exceeds_threshold": self.exceeds_threshold,
            "gap_bits": self.gap_bits,
            "bias_bound_bits": self.bias_bound_bits,
            "analytic_bits": self.analytic_bits,
            "n_trials": self.n_trials,
        }


def plugin_mutual_information(x, y) -> tuple[float, float]:
    """Plug-in I(X;Y) in bits and the first-order (Miller-Madow) bias."""
    x = np.asarray(x)
    y = np.asarray(y)
    n = x.size
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    nx, ny = xi.max() + 1, yi.max() + 1
    joint = np.bincount(xi * ny + yi, minlength=nx * ny).reshape(nx, ny).astype(float)
    pxy = joint / n
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    mi = float(np.sum(pxy[nz] * np.log2(pxy[nz] / (px @ py)[nz])))
    kx, ky, kxy = int((px > 0).sum()), int((py > 0).sum()), int(nz.sum())
    bias = max(0.0, (kxy - kx - ky + 1) / (2.0 * n * math.log(2)))
    return max(0.0, mi), bias


def mutual_information_audit(records: TrialRecords, model=None) -> MutualInfoBudget:
    """Plug-in information shared by the settings and the hidden-state class.

    The threshold is picked by detector count (CHSH 0.046, GHZ 0.415 bits).
    """
    n = len(records)
    if n < MIN_AUDIT_TRIALS:
        raise ValueError(f"need at least {MIN_AUDIT_TRIALS} trials for the audit, got {n}")
    k = records.n_detectors
    mi, bias = plugin_mutual_information(records.settings_code(), records.hidden_state)
    analytic = None
    if model is not None:
        analytic = model.analytic_mutual_information(k) if isinstance(model, Conspiracy) else 0.0
    return MutualInfoBudget(mi, CHSH_MI_THRESHOLD if k == 2 else GHZ_MI_THRESHOLD, bias, n, analytic)


def shuffled_settings(records: TrialRecords, seed=None) -> TrialRecords:
    """Control: permute setting rows to break any setting/hidden-state link."""
    perm = np.random.default_rng(seed).permutation(len(records))
    return TrialRecords(records.settings[perm], records.outcomes, records.tags[perm], records.hidden_state)


# --- control runs ----------------------------------------------------------

RUN_CLASSES = ("all-cosmic", "mixed", "all-fallback")


@dataclass
class RunClass:
    name: str
    count: int
    fraction: float
    statistics: BellStatistics | MerminStatistics | None = field(default=None)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "fraction": self.fraction,
            "statistics": None if self.statistics is None else self.statistics.to_dict(),
        }


def classify_runs(records: TrialRecords) -> dict[str, RunClass]:
    """Split runs by how many detectors were set by cosmic photons.

    all-cosmic: every tag cosmic; all-fallback: none cosmic (fallback or
    local noise); mixed: the rest. Empty input gives an empty partition.
    """
    n = len(records)
    if n == 0:
        return {}
    cosmic = records.tags == SettingSourceTag.COSMIC
    masks = {
        "all-cosmic": cosmic.all(axis=1),
        "all-fallback": ~cosmic.any(axis=1),
    }
    masks["mixed"] = ~(masks["all-cosmic"] | masks["all-fallback"])
    stat = chsh_statistics if records.n_detectors == 2 else mermin_statistics
    out = {}
    for name in RUN_CLASSES:
        m = masks[name]
        c = int(m.sum())
        if c == 0:
            continue
        out[name] = RunClass(name, c, c / n, stat(records.subset(m)))
    return out
