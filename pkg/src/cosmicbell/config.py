"""Experiment configuration files.

Configs are INI files (``configparser`` syntax). Recognised sections::

    [cosmology]
    hubble_constant = 67.3        ; km/s/Mpc
    omega_matter = 0.315
    omega_radiation = 9.2e-5
    omega_lambda = 0.684908       ; optional, defaults to the flat value

    [bands]                       ; optional overrides, "lambda_eff_nm, width_nm"
    r = 623, 137

    [experiment]
    test_kind = CHSH              ; CHSH or GHZ
    n_trials = 100000
    seed = 20140101
    extraction = parity           ; parity or whiten
    bin_width_s = 1e-6

    [arm.1]                       ; one section per arm, 2 for CHSH, 3 for GHZ
    diameter_m = 1.0
    efficiency = 0.5
    baseline_km = 50
    setting_latency_s = 78e-9
    flux_per_s_m2 = 2e4           ; or: catalog = path, source_id = ID

    [noise]
    background_rate_hz = 0
    dark_count_rate_hz = 0

    [bell]
    model = quantum               ; quantum, lhv or conspiracy
    f = 0.0
    angles_deg = 0, 45, 22.5, 67.5

Relative catalog paths resolve against the config file's directory.
"""

from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .catalog import SDSS_BANDS, BandDefinition
from .cosmology import CosmologyParams
from .noisebudget import NoiseModel
from .photonstat import REFERENCE_FLUX, LinkGeometry, TelescopeConfig

CONFIG_ENV_VAR = "COSMICBELL_CONFIG"


@dataclass(frozen=True)
class ArmSpec:
    scope: TelescopeConfig = field(default_factory=TelescopeConfig)
    link: LinkGeometry = field(default_factory=LinkGeometry)
    flux: float | None = REFERENCE_FLUX
    catalog: str | None = None
    source_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "diameter_m": self.scope.diameter,
            "efficiency": self.scope.detector_efficiency,
            "baseline_km": self.link.baseline,
            "setting_latency_s": self.link.setting_latency,
            "flux_per_s_m2": self.flux,
            "catalog": self.catalog,
            "source_id": self.source_id,
        }


@dataclass(frozen=True)
class ExperimentSpec:
    cosmology: CosmologyParams = field(default_factory=CosmologyParams)
    arms: tuple[ArmSpec, ...] = (ArmSpec(), ArmSpec())
    test_kind: str = "CHSH"
    noise: NoiseModel = field(default_factory=NoiseModel)
    n_trials: int = 100_000
    seed: int = 20140101
    model: str = "quantum"
    f: float = 0.0
    angles_deg: tuple[float, float, float, float] = (0.0, 45.0, 22.5, 67.5)
    extraction: str = "parity"
    bin_width: float = 1e-6
    bands: dict = field(default_factory=lambda: dict(SDSS_BANDS))

    def __post_init__(self):
        kind = self.test_kind.upper()
        object.__setattr__(self, "test_kind", kind)
        if kind not in ("CHSH", "GHZ"):
            raise ValueError(f"test_kind must be CHSH or GHZ, got {self.test_kind!r}")
        need = 2 if kind == "CHSH" else 3
        if len(self.arms) != need:
            raise ValueError(f"{kind} needs {need} arms, got {len(self.arms)}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.extraction not in ("parity", "whiten"):
            raise ValueError(f"extraction must be parity or whiten, got {self.extraction!r}")
        if not 0.0 <= self.f <= 1.0:
            raise ValueError("f must be in [0, 1]")
        for arm in self.arms:
            if arm.flux is None and (arm.catalog is None or arm.source_id is None):
                raise ValueError("each arm needs flux_per_s_m2 or catalog + source_id")

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @classmethod
    def reference(cls, test_kind: str = "CHSH", **overrides) -> "ExperimentSpec":
        """1 m telescopes at efficiency 0.5; CHSH: 50 km, F = 2e4; GHZ: 150 km, F/3."""
        if test_kind.upper() == "CHSH":
            arm = ArmSpec(TelescopeConfig(1.0, 0.5), LinkGeometry(50.0), REFERENCE_FLUX)
            arms = (arm, arm)
        else:
            arm = ArmSpec(TelescopeConfig(1.0, 0.5), LinkGeometry(150.0), REFERENCE_FLUX / 3)
            arms = (arm, arm, arm)
        return cls(arms=arms, test_kind=test_kind, **overrides)

    def with_overrides(self, **kw) -> "ExperimentSpec":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        return {
            "cosmology": self.cosmology.as_dict(),
            "test_kind": self.test_kind,
            "arms": [a.to_dict() for a in self.arms],
            "noise": {"background_rate_hz": self.noise.background_rate,
                      "dark_count_rate_hz": self.noise.dark_count_rate},
            "n_trials": self.n_trials,
            "seed": self.seed,
            "bell": {"model": self.model, "f": self.f, "angles_deg": list(self.angles_deg)},
            "extraction": self.extraction,
            "bin_width_s": self.bin_width,
            "bands": {b.name: [b.effective_wavelength, b.bandwidth] for b in self.bands.values()},
        }


def read_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    cp.read(path, encoding="utf-8")
    cp.source_path = path  # type: ignore[attr-defined]
    return cp


def default_config_path() -> str | None:
    return os.environ.get(CONFIG_ENV_VAR) or None


def cosmology_from(cp: configparser.ConfigParser | None) -> CosmologyParams:
    if cp is None or not cp.has_section("cosmology"):
        return CosmologyParams()
    sec = cp["cosmology"]
    kw = {}
    for key in ("hubble_constant", "omega_matter", "omega_radiation", "omega_lambda"):
        if key in sec:
            kw[key] = sec.getfloat(key)
    unknown = set(sec) - set(kw)
    if unknown:
        raise ValueError(f"[cosmology]: unknown keys {sorted(unknown)}")
    return CosmologyParams(**kw)


def bands_from(cp: configparser.ConfigParser | None) -> dict[str, BandDefinition]:
    bands = dict(SDSS_BANDS)
    if cp is not None and cp.has_section("bands"):
        for name, value in cp["bands"].items():
            lam, width = (float(v) for v in value.split(","))
            bands[name] = BandDefinition(name, lam, width)
    return bands


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def spec_from_config(cp: configparser.ConfigParser) -> ExperimentSpec:
    base_dir = Path(getattr(cp, "source_path", ".")).parent
    exp = cp["experiment"] if cp.has_section("experiment") else {}
    test_kind = exp.get("test_kind", "CHSH").upper()
    arm_sections = sorted((s for s in cp.sections() if s.startswith("arm.")), key=lambda s: int(s.split(".")[1]))

    if arm_sections:
        arms = []
        for name in arm_sections:
            sec = cp[name]
            catalog = sec.get("catalog")
            if catalog is not None and not Path(catalog).is_absolute():
                catalog = str(base_dir / catalog)
            flux = sec.getfloat("flux_per_s_m2") if "flux_per_s_m2" in sec else None
            if flux is None and catalog is None:
                flux = REFERENCE_FLUX
            arms.append(ArmSpec(
                TelescopeConfig(sec.getfloat("diameter_m", 1.0), sec.getfloat("efficiency", 0.5)),
                LinkGeometry(sec.getfloat("baseline_km", 50.0), sec.getfloat("setting_latency_s", 0.0)),
                flux, catalog, sec.get("source_id"),
            ))
        arms = tuple(arms)
    else:
        arms = ExperimentSpec.reference(test_kind).arms

    noise = NoiseModel()
    if cp.has_section("noise"):
        noise = NoiseModel(cp["noise"].getfloat("background_rate_hz", 0.0), cp["noise"].getfloat("dark_count_rate_hz", 0.0))

    bell = cp["bell"] if cp.has_section("bell") else {}
    angles = _floats(bell.get("angles_deg", "0, 45, 22.5, 67.5"))
    if len(angles) != 4:
        raise ValueError("[bell] angles_deg needs four values")

    return ExperimentSpec(
        cosmology=cosmology_from(cp),
        arms=arms,
        test_kind=test_kind,
        noise=noise,
        n_trials=int(exp.get("n_trials", 100_000)),
        seed=int(exp.get("seed", 20140101)),
        model=bell.get("model", "quantum"),
        f=float(bell.get("f", 0.0)),
        angles_deg=angles,
        extraction=exp.get("extraction", "parity"),
        bin_width=float(exp.get("bin_width_s", 1e-6)),
        bands=bands_from(cp),
    )


def load_spec(path) -> ExperimentSpec:
    return spec_from_config(read_config(path))


def angles_radians(spec: ExperimentSpec) -> tuple[float, ...]:
    return tuple(math.radians(a) for a in spec.angles_deg)
