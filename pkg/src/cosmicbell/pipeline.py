"""End-to-end run: source flux -> coincidences -> arrivals -> bits -> Bell test -> audits."""

from __future__ import annotations

import logging
import math

import numpy as np

from . import bellsim, catalog, noisebudget, photonstat, randomness
from .config import ExperimentSpec, angles_radians

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.debug("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def _arm_fluxes(spec: ExperimentSpec) -> list[float]:
    fluxes = []
    loaded = {}
    for arm in spec.arms:
        if arm.flux is not None:
            fluxes.append(arm.flux)
            continue
        if arm.catalog not in loaded:
            loaded[arm.catalog] = {r.id: r for r in catalog.load_catalog(arm.catalog).records}
        rec = loaded[arm.catalog].get(arm.source_id)
        if rec is None:
            raise KeyError(f"source {arm.source_id!r} not in {arm.catalog}")
        fluxes.append(rec.photon_flux(spec.bands))
    return fluxes


def _trigger_settings(spec, rng_arms, rng_fallback, detected_rates, windows):
    """Latch the first photon of each window per arm and turn it into a setting bit."""
    n = spec.n_trials
    k = spec.n_arms
    settings = rng_fallback.integers(0, 2, size=(n, k), dtype=np.uint8)
    tags = np.full((n, k), bellsim.SettingSourceTag.FALLBACK, np.uint8)
    bit_reports = []
    for d in range(k):
        window = windows[d]
        duration = n * window
        sig_rate = detected_rates[d]
        noise_rate = spec.noise.total_rate
        streams = []
        rng_sig, rng_noise = rng_arms[d]
        if sig_rate > 0:
            streams.append((randomness.simulate_arrivals(sig_rate, duration, rng_sig).arrival_times, 0))
        if noise_rate > 0:
            streams.append((randomness.simulate_arrivals(noise_rate, duration, rng_noise).arrival_times, 1))
        if not streams:
            bit_reports.append(None)
            continue
        times = np.concatenate([t for t, _ in streams])
        origin = np.concatenate([np.full(t.size, o, np.uint8) for t, o in streams])
        order = np.argsort(times, kind="stable")
        times, origin = times[order], origin[order]
        keep = np.concatenate([[True], np.diff(times) > 0]) if times.size else np.zeros(0, bool)
        times, origin = times[keep], origin[keep]
        if times.size == 0:
            bit_reports.append(None)
            continue
        stream = randomness.ArrivalStream(times, sig_rate + noise_rate, duration)
        fired, first = randomness.latch_first(stream, window, n)
        first_origin = origin[np.searchsorted(times, first)]
        if spec.extraction == "parity":
            bits = randomness.parity_bits(randomness.ArrivalStream(first, stream.nominal_rate), spec.bin_width).bits
        else:
            bits = randomness.latched_whitened_bits(first, fired, window, stream.nominal_rate)
        settings[fired, d] = bits
        tags[fired, d] = np.where(first_origin == 0, bellsim.SettingSourceTag.COSMIC,
                                  bellsim.SettingSourceTag.LOCAL_NOISE)
        report = None
        if bits.size >= randomness.MIN_REPORT_BITS:
            report = randomness.randomness_report(bits).to_dict()
        bit_reports.append({"triggered_windows": int(fired.size), "bits": report})
    return settings, tags, bit_reports


def end_to_end(spec: ExperimentSpec) -> dict:
    """Run every stage and return one JSON-ready report."""
    report = {"config": spec.to_dict()}
    ss = np.random.SeedSequence(spec.seed)
    arm_seeds = ss.spawn(spec.n_arms)
    fallback_seed, bell_seed = ss.spawn(2)

    with _Stage("flux"):
        fluxes = _arm_fluxes(spec)
        report["flux"] = {"photon_flux_per_s_m2": fluxes}

    with _Stage("coincidence"):
        windows = [photonstat.timing_window(a.link) for a in spec.arms]
        geom = photonstat.ExperimentGeometry(tuple(photonstat.Arm(a.scope, a.link) for a in spec.arms))
        mus = geom.mus(fluxes)
        p_arm = [photonstat.detection_probability(m) for m in mus]
        p_all = photonstat.coincidence_probability(mus)
        window = max(w.window for w in windows)
        rate = p_all / window
        runs = photonstat.runs_estimate(rate, 900.0)
        detected = [
            photonstat.photon_rate(photonstat.SourceFlux(f), a.scope) * a.scope.detector_efficiency
            for f, a in zip(fluxes, spec.arms)
        ]
        report["coincidence"] = {
            "window_s": [w.window for w in windows],
            "slack_s": [w.slack for w in windows],
            "timing_valid": all(w.valid for w in windows),
            "mu": mus,
            "p_arm": p_arm,
            "p_coincidence": p_all,
            "coincidence_rate_hz": rate,
            "runs_in_900_s": runs.expected,
            "runs_in_900_s_std": runs.std,
            "detected_signal_rate_hz": detected,
        }

    with _Stage("arrivals+bits"):
        rng_arms = [tuple(np.random.default_rng(s) for s in seed.spawn(2)) for seed in arm_seeds]
        settings, tags, bit_reports = _trigger_settings(
            spec, rng_arms, np.random.default_rng(fallback_seed), detected, [w.window for w in windows]
        )
        report["bits"] = {"extraction": spec.extraction, "arms": bit_reports}

    with _Stage("bell"):
        n_det = spec.n_arms
        model = bellsim.make_model(spec.model, n_det, spec.f)
        source = bellsim.FixedSettings(settings, tags)
        if spec.test_kind == "CHSH":
            stats, records = bellsim.run_chsh(model, source, angles_radians(spec), spec.n_trials, bell_seed)
        else:
            stats, records = bellsim.run_ghz(model, spec.n_trials, bell_seed, source)
        report["bell"] = {"model": model.name, **stats.to_dict()}

    with _Stage("classification"):
        classes = bellsim.classify_runs(records)
        noise_rate = spec.noise.total_rate
        expected_cosmic = 1.0
        for m, win in zip(mus, windows):
            total = m + noise_rate * win.window
            share = m / total if total > 0 else 0.0
            expected_cosmic *= -math.expm1(-total) * share
        report["runs"] = {
            "classes": {name: c.to_dict() for name, c in classes.items()},
            "all_cosmic_fraction": classes["all-cosmic"].fraction if "all-cosmic" in classes else 0.0,
            "expected_all_cosmic_fraction": expected_cosmic,
        }

    with _Stage("noise"):
        verdicts = []
        for det in detected:
            if det + noise_rate > 0:
                frac = noisebudget.local_fraction(det, spec.noise)
                verdicts.append(noisebudget.budget_check(frac, spec.test_kind).to_dict())
            else:
                verdicts.append(None)
        report["noise"] = {"per_arm": verdicts}

    with _Stage("audit"):
        if len(records) >= bellsim.MIN_AUDIT_TRIALS:
            report["audit"] = bellsim.mutual_information_audit(records, model).to_dict()
        else:
            report["audit"] = None

    report["seeds"] = {"root": spec.seed}
    return report
