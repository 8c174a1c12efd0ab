import json
import math

import pytest

from cosmicbell import pipeline
from cosmicbell.config import ArmSpec, ExperimentSpec
from cosmicbell.noisebudget import NoiseModel


@pytest.fixture(scope="module")
def chsh_report():
    return pipeline.end_to_end(ExperimentSpec.reference("CHSH", n_trials=100_000, seed=1))


def test_chsh_reference(chsh_report):
    r = chsh_report
    assert r["coincidence"]["p_coincidence"] == pytest.approx(0.53, abs=0.01)
    frac = r["runs"]["all_cosmic_fraction"]
    assert frac == pytest.approx(r["runs"]["expected_all_cosmic_fraction"], abs=5 * math.sqrt(0.25 / 1e5))
    assert frac == pytest.approx(0.53, abs=0.01)
    assert abs(r["bell"]["S"]) == pytest.approx(2 * math.sqrt(2), abs=0.05)
    assert r["coincidence"]["timing_valid"]
    assert r["bits"]["arms"][0]["bits"]["passed"]
    json.dumps(r)


def test_ghz_reference():
    r = pipeline.end_to_end(ExperimentSpec.reference("GHZ", n_trials=50_000, seed=2))
    assert r["coincidence"]["p_coincidence"] == pytest.approx(0.38, abs=0.01)
    assert r["bell"]["M"] == pytest.approx(4.0, abs=0.05)


def test_zero_flux_all_fallback():
    arm = ArmSpec(flux=0.0)
    r = pipeline.end_to_end(ExperimentSpec(arms=(arm, arm), n_trials=20_000, seed=3))
    assert r["coincidence"]["p_coincidence"] == 0.0
    assert r["coincidence"]["runs_in_900_s"] == 0.0
    assert list(r["runs"]["classes"]) == ["all-fallback"]
    assert r["runs"]["all_cosmic_fraction"] == 0.0


def test_noise_tags_and_budget():
    spec = ExperimentSpec.reference("CHSH", n_trials=50_000, seed=4, noise=NoiseModel(2000.0, 0.0))
    r = pipeline.end_to_end(spec)
    verdict = r["noise"]["per_arm"][0]
    assert not verdict["passed"]
    assert r["runs"]["all_cosmic_fraction"] == pytest.approx(r["runs"]["expected_all_cosmic_fraction"], abs=0.01)


def test_whiten_mode():
    r = pipeline.end_to_end(ExperimentSpec.reference("CHSH", n_trials=50_000, seed=5, extraction="whiten"))
    assert r["bits"]["arms"][1]["bits"]["passed"]


def test_deterministic():
    spec = ExperimentSpec.reference("CHSH", n_trials=20_000, seed=6)
    assert pipeline.end_to_end(spec) == pipeline.end_to_end(spec)


def test_stage_error_labels(tmp_path):
    arm = ArmSpec(flux=None, catalog=str(tmp_path / "missing.csv"), source_id="Q")
    with pytest.raises(pipeline.StageError) as exc:
        pipeline.end_to_end(ExperimentSpec(arms=(arm, arm), n_trials=10))
    assert exc.value.stage == "flux"


def test_catalog_flux(data_dir):
    arm = ArmSpec(flux=None, catalog=str(data_dir / "three_quasars.csv"), source_id="QSO-A")
    r = pipeline.end_to_end(ExperimentSpec(arms=(arm, arm), n_trials=1000, seed=7))
    assert 1e2 < r["flux"]["photon_flux_per_s_m2"][0] < 1e4
