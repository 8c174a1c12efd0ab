"""Polyline data for a (comoving distance, conformal time) diagram.

The diagram is a 1+1 slice. Each source sits on a great circle through the
sky at position angle ``angle_deg``; its horizontal coordinate is the
projection d cos(angle), exact for sources at 0 or 180 degrees. Overlap
regions are computed on the true 3-d chord between two emission events, so
they are nonempty exactly when the causal verdict says the cones overlap,
and are drawn along the segment joining the projected events.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from pathlib import Path

from . import causal
from .cosmology import DEFAULT_PARAMS, CosmologyParams, comoving_distance, conformal_age, conformal_time

COLUMNS = ("element", "label", "vertex", "x_mpc", "eta_mpc")


@dataclass(frozen=True)
class DiagramSource:
    label: str
    z: float
    angle_deg: float


def read_sources(path) -> list[DiagramSource]:
    """CSV with header ``label,z,angle_deg``."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"z", "angle_deg"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for k, row in enumerate(reader):
            z = float(row["z"])
            if z < 0:
                raise ValueError(f"{path}: negative redshift on row {k + 2}")
            out.append(DiagramSource(row.get("label") or f"s{k}", z, float(row["angle_deg"])))
    return out


def pair_overlap_polygon(eta_i: float, eta_j: float, chord: float) -> list[tuple[float, float]]:
    """Region {eta >= 0} inside both past cones, as (s, eta) with s along the chord from i.

    Empty when the cones are disjoint on the eta = 0 surface.
    """
    lo = max(-eta_i, chord - eta_j)
    hi = min(eta_i, chord + eta_j)
    if hi <= lo:
        return []

    def top(s):
        return min(eta_i - abs(s), eta_j - abs(s - chord))

    # the upper envelope is piecewise linear; kinks sit at apexes and line crossings
    cand = {lo, hi, 0.0, chord}
    for si in (1, -1):
        for sj in (1, -1):
            # eta_i - si*s = eta_j - sj*(s - chord)
            if si != sj:
                cand.add((eta_i - eta_j - sj * chord) / (si - sj))
    xs = sorted(s for s in cand if lo <= s <= hi)
    pts = [(lo, 0.0)] + [(s, max(0.0, top(s))) for s in xs] + [(hi, 0.0)]
    return [p for k, p in enumerate(pts) if k == 0 or p != pts[k - 1]]


def diagram_rows(sources: list[DiagramSource], params: CosmologyParams = DEFAULT_PARAMS) -> list[dict]:
    eta0 = conformal_age(params)
    rows = []

    def line(element, label, pts):
        for v, (x, e) in enumerate(pts):
            rows.append({"element": element, "label": label, "vertex": v, "x_mpc": x, "eta_mpc": e})

    line("axis", "eta=0", [(-eta0, 0.0), (eta0, 0.0)])
    line("earth_worldline", "earth", [(0.0, 0.0), (0.0, eta0)])
    line("observer_past_cone", "earth", [(-eta0, 0.0), (0.0, eta0), (eta0, 0.0)])

    placed = []
    for src in sources:
        d = comoving_distance(src.z, params)
        eta = conformal_time(src.z, params)
        th = math.radians(src.angle_deg)
        x = d * math.cos(th)
        event = causal.SpacetimeEvent(eta, (d * math.cos(th), d * math.sin(th), 0.0), src.label)
        placed.append((src, x, event))
        line("source_worldline", src.label, [(x, 0.0), (x, eta0)])
        line("emission_event", src.label, [(x, eta)])
        line("past_cone", src.label, [(x - eta, 0.0), (x, eta), (x + eta, 0.0)])
        if eta > d:
            line("earth_overlap", src.label, [(0.0, 0.0), (0.0, eta - d)])

    for (si, xi, ei), (sj, xj, ej) in itertools.combinations(placed, 2):
        chord = float(math.dist(ei.comoving_position, ej.comoving_position))
        poly = pair_overlap_polygon(ei.conformal_time, ej.conformal_time, chord)
        if not poly:
            continue
        scale = (xj - xi) / chord if chord > 0 else 0.0
        line("overlap", f"{si.label}|{sj.label}", [(xi + s * scale, e) for s, e in poly])
    return rows


def write_diagram(rows, path):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=COLUMNS)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
