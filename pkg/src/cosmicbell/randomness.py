"""Photon arrival streams and detector-setting bit extraction.

Two extractors:

* parity: one bit per arrival, the parity of the index of the time bin
  (default one microsecond) the photon fell into, bins counted from t = 0;
* whitening: for a Poisson process of rate r the gaps tau are exponential,
  so u = 1 - exp(-r tau) is uniform on [0, 1); the leading k binary digits
  of u are k fair bits per gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_WHITENED_BITS = 40


@dataclass
class ArrivalStream:
    arrival_times: np.ndarray  # s, strictly increasing
    nominal_rate: float  # photons/s
    duration: float | None = None

    def __post_init__(self):
        self.arrival_times = np.asarray(self.arrival_times, dtype=float)
        if not self.nominal_rate > 0:
            raise ValueError("nominal_rate must be positive")
        t = self.arrival_times
        if t.ndim != 1:
            raise ValueError("arrival_times must be 1-d")
        if t.size and (t[0] < 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("arrival_times must be nonnegative and strictly increasing")

    def __len__(self):
        return self.arrival_times.size

    @property
    def empirical_rate(self) -> float:
        """Gaps per unit time over the span of the stream."""
        t = self.arrival_times
        if t.size < 2:
            raise ValueError("need at least two arrivals to estimate a rate")
        return (t.size - 1) / (t[-1] - t[0])

    def save(self, path):
        np.savetxt(path, self.arrival_times, fmt="%.17g",
                   header=f"nominal_rate={self.nominal_rate!r}", comments="# ")

    @classmethod
    def load(cls, path, nominal_rate: float | None = None) -> "ArrivalStream":
        first = Path(path).open(encoding="utf-8").readline()
        if nominal_rate is None and first.startswith("#") and "nominal_rate=" in first:
            nominal_rate = float(first.split("nominal_rate=", 1)[1])
        times = np.atleast_1d(np.loadtxt(path, dtype=float, ndmin=1))
        stream = cls(times, nominal_rate if nominal_rate is not None else 1.0)
        if nominal_rate is None:
            stream.nominal_rate = stream.empirical_rate
        return stream


@dataclass
class SettingBitstream:
    bits: np.ndarray  # uint8 in {0, 1}
    provenance: str  # "parity" | "whitened"
    source_rate: float
    bit_times: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.size and self.bits.max() > 1:
            raise ValueError("bits must be 0 or 1")

    def __len__(self):
        return self.bits.size

    def save(self, path):
        Path(path).write_text("".join(f"{b}\n" for b in self.bits.tolist()), encoding="utf-8")

    @classmethod
    def load(cls, path, provenance="parity", source_rate=float("nan")) -> "SettingBitstream":
        bits = [int(s) for s in Path(path).read_text(encoding="utf-8").split()]
        return cls(np.array(bits, dtype=np.uint8), provenance, source_rate)


def simulate_arrivals(rate: float, duration: float, seed=None) -> ArrivalStream:
    """Homogeneous Poisson process on [0, duration) built from exponential gaps."""
    if not rate > 0:
        raise ValueError("rate must be positive")
    if duration < 0:
        raise ValueError("duration must be >= 0")
    rng = np.random.default_rng(seed)
    chunks, t0 = [], 0.0
    expected = rate * duration
    while True:
        n = int(expected + 6 * math.sqrt(expected) + 16)
        t = t0 + np.cumsum(rng.exponential(1.0 / rate, size=n))
        if t[-1] >= duration:
            chunks.append(t[t < duration])
            break
        chunks.append(t)
        t0 = t[-1]
        expected = rate * (duration - t0)
    times = np.concatenate(chunks)
    # exponential draws of exactly zero would break strict monotonicity
    if times.size > 1 and np.any(np.diff(times) <= 0):
        times = np.unique(times)
    return ArrivalStream(times, rate, duration)


def parity_bits(stream: ArrivalStream, bin_width: float = 1e-6) -> SettingBitstream:
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    idx = np.floor(stream.arrival_times / bin_width).astype(np.int64)
    return SettingBitstream((idx & 1).astype(np.uint8), "parity", stream.nominal_rate, stream.arrival_times)


def whitened_values(stream: ArrivalStream, rate: float | None = None) -> np.ndarray:
    """u = 1 - exp(-rate * gap) for every inter-arrival gap."""
    if len(stream) < 2:
        raise ValueError("whitening needs at least two arrivals")
    rate = stream.empirical_rate if rate is None else rate
    return -np.expm1(-rate * np.diff(stream.arrival_times))


def whitened_bits(stream: ArrivalStream, bits_per_arrival: int = 1, rate: float | None = None) -> SettingBitstream:
    """Leading ``bits_per_arrival`` binary digits of each whitened gap, MSB first.

    ``rate`` defaults to the stream's empirical rate; a wrong rate biases the
    output (the report detects this).
    """
    k = int(bits_per_arrival)
    if k < 1:
        raise ValueError("bits_per_arrival must be >= 1")
    if k > MAX_WHITENED_BITS:
        raise ValueError(f"bits_per_arrival={k} exceeds double precision budget ({MAX_WHITENED_BITS})")
    u = whitened_values(stream, rate)
    q = np.minimum(np.floor(u * 2.0**k), 2.0**k - 1).astype(np.int64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    bits = ((q[:, None] >> shifts) & 1).astype(np.uint8).ravel()
    used_rate = stream.empirical_rate if rate is None else rate
    times = np.repeat(stream.arrival_times[1:], k)
    return SettingBitstream(bits, "whitened", used_rate, times)


def latch_first(stream: ArrivalStream, window: float, n_windows: int) -> tuple[np.ndarray, np.ndarray]:
    """First arrival in each back-to-back setting window; later ones are dropped.

    Returns (window indices that fired, arrival time of the first photon).
    """
    if not window > 0:
        raise ValueError("window must be positive")
    t = stream.arrival_times
    w = np.floor(t / window).astype(np.int64)
    keep = w < n_windows
    w, t = w[keep], t[keep]
    windows, first = np.unique(w, return_index=True)
    return windows, t[first]


def latched_whitened_bits(first_times, windows, window: float, rate: float) -> np.ndarray:
    """One whitened bit per latched window.

    Given that a window of length w fired, the delay tau of its first photon
    from the window start has CDF (1 - exp(-r tau)) / (1 - exp(-r w)), which
    maps tau to a uniform value; the bit is its leading binary digit.
    """
    tau = np.asarray(first_times) - np.asarray(windows) * window
    u = np.expm1(-rate * tau) / np.expm1(-rate * window)
    return (u >= 0.5).astype(np.uint8)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    threshold: float
    passed: bool


@dataclass
class RandomnessReport:
    n_bits: int
    ones_fraction: float
    monobit: TestResult  # |z| of the ones count
    serial_correlation: TestResult  # |rho_1| against 3/sqrt(n)
    runs: TestResult  # |z| of the Wald-Wolfowitz run count
    min_entropy: TestResult  # bits per bit, lower bound

    @property
    def passed(self) -> bool:
        return self.monobit.passed and self.serial_correlation.passed and self.runs.passed and self.min_entropy.passed

    def to_dict(self) -> dict:
        out = {"n_bits": self.n_bits, "ones_fraction": self.ones_fraction, "passed": self.passed}
        for name in ("monobit", "serial_correlation", "runs", "min_entropy"):
            r = getattr(self, name)
            out[name] = {"statistic": r.statistic, "threshold": r.threshold, "passed": r.passed}
        return out


MIN_REPORT_BITS = 100
SIGMAS = 3.0


def randomness_report(bits, sigmas: float = SIGMAS) -> RandomnessReport:
    """Monobit, lag-1 serial correlation, runs and plug-in min-entropy at ``sigmas``."""
    b = np.asarray(getattr(bits, "bits", bits), dtype=np.int64)
    n = b.size
    if n < MIN_REPORT_BITS:
        raise ValueError(f"need at least {MIN_REPORT_BITS} bits, got {n}")
    ones = int(b.sum())
    p = ones / n
    z_mono = abs(2 * ones - n) / math.sqrt(n)

    x = 2.0 * b - 1.0
    x0, x1 = x[:-1] - x[:-1].mean(), x[1:] - x[1:].mean()
    denom = math.sqrt(float(x0 @ x0) * float(x1 @ x1))
    rho = float(x0 @ x1) / denom if denom > 0 else 1.0
    rho_thr = sigmas / math.sqrt(n)

    # Wald-Wolfowitz: runs given the observed ones/zeros split
    runs = 1 + int(np.count_nonzero(np.diff(b)))
    n1, n0 = ones, n - ones
    if n1 == 0 or n0 == 0:
        z_runs = math.inf
    else:
        mean = 2.0 * n1 * n0 / n + 1.0
        var = 2.0 * n1 * n0 * (2.0 * n1 * n0 - n) / (n * n * (n - 1.0))
        z_runs = abs(runs - mean) / math.sqrt(var) if var > 0 else math.inf

    h_min = -math.log2(max(p, 1 - p))
    h_thr = -math.log2(0.5 + 0.5 * sigmas / math.sqrt(n))

    return RandomnessReport(
        n_bits=n,
        ones_fraction=p,
        monobit=TestResult(z_mono, sigmas, z_mono < sigmas),
        serial_correlation=TestResult(abs(rho), rho_thr, abs(rho) < rho_thr),
        runs=TestResult(z_runs, sigmas, z_runs < sigmas),
        min_entropy=TestResult(h_min, h_thr, h_min >= h_thr),
    )
