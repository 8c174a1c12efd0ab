"""Quasar catalog ingestion, AB photometry to photon flux, candidate search."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import causal
from .cosmology import DEFAULT_PARAMS, CosmologyParams, comoving_distance, conformal_time
from .photonstat import ExperimentGeometry

H_PLANCK = 6.62607015e-34  # J s
C_M_S = 299_792_458.0
AB_ZERO_POINT_JY = 3631.0
JY = 1e-26  # W m^-2 Hz^-1


@dataclass(frozen=True)
class BandDefinition:
    name: str
    effective_wavelength: float  # nm
    bandwidth: float  # nm

    def __post_init__(self):
        if not (self.effective_wavelength > 0 and self.bandwidth > 0):
            raise ValueError(f"band {self.name}: wavelength and bandwidth must be positive")


# (lambda_eff, delta_lambda) in nm
SDSS_BANDS = {
    "u": BandDefinition("u", 355.0, 60.0),
    "g": BandDefinition("g", 477.0, 138.0),
    "r": BandDefinition("r", 623.0, 137.0),
    "i": BandDefinition("i", 764.0, 152.0),
    "z": BandDefinition("z", 906.0, 95.0),
}


def magnitude_to_photon_flux(m: float, band: BandDefinition) -> float:
    """Approximate photon flux (photons s^-1 m^-2) in a band from an AB magnitude.

    Treats f_nu as flat across the band, so the photon rate is
    f_nu * dnu / (h nu_eff) with nu_eff = c / lambda and dnu = c dlambda / lambda^2.
    """
    if not math.isfinite(m):
        raise ValueError(f"magnitude must be finite, got {m}")
    f_nu = AB_ZERO_POINT_JY * JY * 10.0 ** (-0.4 * m)
    lam = band.effective_wavelength * 1e-9
    nu = C_M_S / lam
    dnu = C_M_S * band.bandwidth * 1e-9 / lam**2
    return f_nu * dnu / (H_PLANCK * nu)


@dataclass(frozen=True)
class QuasarRecord:
    id: str
    position: causal.SkyPosition
    z: float
    magnitudes: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.z >= 0:
            raise ValueError(f"{self.id}: redshift must be >= 0")
        for band, m in self.magnitudes.items():
            if not math.isfinite(m):
                raise ValueError(f"{self.id}: non-finite {band} magnitude")

    def photon_flux(self, bands: dict[str, BandDefinition] = SDSS_BANDS) -> float:
        """Photon flux summed over every band with a measured magnitude."""
        return sum(magnitude_to_photon_flux(m, bands[b]) for b, m in self.magnitudes.items())


MANDATORY_COLUMNS = ("id", "ra", "dec", "z")
# the redshift column is "z", so the z-band magnitude is "z_mag"
BAND_COLUMNS = {"u": "u", "g": "g", "r": "r", "i": "i", "z_mag": "z"}


class CatalogFormatError(ValueError):
    pass


@dataclass
class CatalogLoad:
    records: list[QuasarRecord]
    rejected: list[tuple[int, str]]  # (line number, reason)

    @property
    def n_accepted(self) -> int:
        return len(self.records)

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)


def load_catalog(path, delimiter: str | None = None, strict: bool = False) -> CatalogLoad:
    """Read a comma- or tab-delimited quasar table with a header row.

    Rows failing validation are collected in ``rejected`` with their line
    number, or raise immediately when ``strict``.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines:
        raise CatalogFormatError(f"{path}: empty file, no header")
    if delimiter is None:
        delimiter = "\t" if "\t" in lines[0] else ","
    reader = csv.reader(lines, delimiter=delimiter)
    header = [h.strip().lower() for h in next(reader)]
    missing = [c for c in MANDATORY_COLUMNS if c not in header]
    if missing:
        raise CatalogFormatError(f"{path}: missing mandatory columns {missing}")
    col = {name: header.index(name) for name in header}

    records, rejected = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != len(header):
                raise ValueError(f"expected {len(header)} fields, got {len(row)}")
            cell = {name: row[i].strip() for name, i in col.items()}
            mags = {}
            for colname, band in BAND_COLUMNS.items():
                if cell.get(colname):
                    mags[band] = _number(cell[colname], colname)
            rec = QuasarRecord(
                id=cell["id"],
                position=causal.SkyPosition(_number(cell["ra"], "ra"), _number(cell["dec"], "dec")),
                z=_number(cell["z"], "z"),
                magnitudes=mags,
            )
        except ValueError as exc:
            if strict:
                raise CatalogFormatError(f"{path}:{lineno}: {exc}") from exc
            rejected.append((lineno, str(exc)))
            continue
        records.append(rec)
    return CatalogLoad(records, rejected)


def _number(s: str, name: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise ValueError(f"column {name!r}: cannot parse {s!r}") from None
    if not math.isfinite(v):
        raise ValueError(f"column {name!r}: non-finite value {s!r}")
    return v


def write_catalog(records, path, delimiter=","):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter)
        w.writerow(["id", "ra", "dec", "z", "u", "g", "r", "i", "z_mag"])
        for rec in records:
            mags = [repr(rec.magnitudes[b]) if b in rec.magnitudes else "" for b in "ugriz"]
            w.writerow([rec.id, repr(rec.position.right_ascension), repr(rec.position.declination), repr(rec.z), *mags])


@dataclass
class CandidateSet:
    members: tuple[QuasarRecord, ...]
    separations: dict[tuple[int, int], float]  # degrees
    verdict: causal.CausalVerdict
    fluxes: tuple[float, ...]
    coincidence_probability: float

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(m.id for m in self.members)

    def sort_key(self):
        return (-self.coincidence_probability, -min(self.fluxes), self.ids)

    def to_dict(self) -> dict:
        return {
            "ids": list(self.ids),
            "redshifts": [m.z for m in self.members],
            "separations_deg": {f"{i}-{j}": a for (i, j), a in sorted(self.separations.items())},
            "photon_flux_per_s_m2": list(self.fluxes),
            "coincidence_probability": self.coincidence_probability,
            "earth_margin_mpc": self.verdict.earth_margin,
            "pairwise_margin_mpc": {f"{i}-{j}": m for (i, j), m in sorted(self.verdict.pairwise_margin.items())},
        }


class _Prepared:
    """Per-record geometry cached once per search."""

    def __init__(self, records, params, bands):
        self.records = list(records)
        n = len(self.records)
        self.d = np.empty(n)
        self.eta = np.empty(n)
        self.unit = np.empty((n, 3))
        self.dec = np.empty(n)
        self.flux = np.empty(n)
        for k, rec in enumerate(self.records):
            self.d[k] = comoving_distance(rec.z, params)
            self.eta[k] = conformal_time(rec.z, params)
            self.unit[k] = rec.position.unit_vector()
            self.dec[k] = rec.position.declination
            self.flux[k] = rec.photon_flux(bands)
        self.events = [
            causal.SpacetimeEvent(self.eta[k], tuple(self.d[k] * self.unit[k]), rec.id)
            for k, rec in enumerate(self.records)
        ]

    def compatible_with(self, i: int) -> np.ndarray:
        """Indices j > i whose light cone is disjoint from record i's."""
        j = np.arange(i + 1, len(self.records))
        if j.size == 0:
            return j
        # the separation can be at most 180 - |dec_i + dec_j|; drop pairs that
        # cannot reach the angle their redshifts need
        d1, d2 = self.d[i], self.d[j]
        need = self.eta[i] + self.eta[j]
        with np.errstate(divide="ignore", invalid="ignore"):
            cos_need = (d1 * d1 + d2 * d2 - need * need) / (2 * d1 * d2)
        alpha_need = np.degrees(np.arccos(np.clip(cos_need, -1.0, 1.0)))
        alpha_need[need >= d1 + d2] = np.inf
        reachable = 180.0 - np.abs(self.dec[i] + self.dec[j]) >= alpha_need - 1e-9
        j = j[reachable]
        sep = np.linalg.norm(self.d[j, None] * self.unit[j] - d1 * self.unit[i], axis=1)
        return j[sep >= self.eta[i] + self.eta[j]]


def _candidate(prep: _Prepared, idx, geometry: ExperimentGeometry) -> CandidateSet | None:
    events = [prep.events[k] for k in idx]
    verdict = causal.lightcones_disjoint(events)
    if not verdict.ok:
        return None
    members = tuple(prep.records[k] for k in idx)
    seps = {
        (a, b): causal.angular_separation(members[a].position, members[b].position)
        for a, b in itertools.combinations(range(len(idx)), 2)
    }
    fluxes = tuple(float(prep.flux[k]) for k in idx)
    return CandidateSet(members, seps, verdict, fluxes, geometry.coincidence(fluxes))


def _eligible(records, min_z, params):
    # a member whose own cone reaches Earth's worldline can never qualify
    out = []
    for rec in records:
        if rec.z < min_z:
            continue
        if comoving_distance(rec.z, params) < conformal_time(rec.z, params):
            continue
        out.append(rec)
    # canonical order so row permutations cannot change results
    return sorted(out, key=lambda r: (r.id, r.z, r.position.right_ascension, r.position.declination))


def find_pairs(
    records,
    geometry: ExperimentGeometry | None = None,
    min_z: float = 0.0,
    params: CosmologyParams = DEFAULT_PARAMS,
    bands: dict[str, BandDefinition] = SDSS_BANDS,
) -> list[CandidateSet]:
    """All causally independent pairs, best coincidence probability first."""
    geometry = geometry or ExperimentGeometry()
    prep = _Prepared(_eligible(records, min_z, params), params, bands)
    out = []
    for i in range(len(prep.records)):
        for j in prep.compatible_with(i):
            cand = _candidate(prep, (i, int(j)), geometry)
            if cand is not None:
                out.append(cand)
    out.sort(key=CandidateSet.sort_key)
    return out


def find_triples(
    records,
    geometry: ExperimentGeometry | None = None,
    min_z: float = 0.0,
    params: CosmologyParams = DEFAULT_PARAMS,
    bands: dict[str, BandDefinition] = SDSS_BANDS,
) -> list[CandidateSet]:
    """All causally independent triples, best triple-coincidence probability first."""
    geometry = geometry or ExperimentGeometry()
    prep = _Prepared(_eligible(records, min_z, params), params, bands)
    adj = [set(int(j) for j in prep.compatible_with(i)) for i in range(len(prep.records))]
    out = []
    for i in range(len(prep.records)):
        for j in sorted(adj[i]):
            for k in sorted(adj[i] & adj[j]):
                cand = _candidate(prep, (i, j, k), geometry)
                if cand is not None:
                    out.append(cand)
    out.sort(key=CandidateSet.sort_key)
    return out
