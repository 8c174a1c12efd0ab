"""Coincidence probabilities, run rates and telescope sizing for the reference setups.

    python scripts/coincidence_budget.py [--windows 1000000] [--seed 1]
"""

import argparse
import sys

import numpy as np

from cosmicbell import photonstat as ps


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--windows", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    setups = {
        "CHSH (2 x F, 50 km)": (ps.reference_geometry(2), [ps.REFERENCE_FLUX] * 2),
        "GHZ (3 x F/3, 150 km)": (ps.reference_geometry(3), [ps.REFERENCE_FLUX / 3] * 3),
    }
    for name, (geom, fluxes) in setups.items():
        mus = geom.mus(fluxes)
        p = ps.coincidence_probability(mus)
        window = ps.timing_window(geom.arm(0).link).window
        rate = p / window
        runs = ps.runs_estimate(rate, 900.0)
        est, se = ps.simulate_coincidences(mus, args.windows, args.seed)
        print(f"{name}: mu={mus[0]:.4f} P={p:.4f} MC={est:.4f}+-{se:.4f} "
              f"window={window * 1e6:.1f}us rate={rate:.0f}Hz runs/15min={runs.expected:.3g}")

    print("\nhalving the collecting area:")
    for mu in (1e-3, 1e-2, 0.3, 1.31):
        r = ps.scaling_report(mu, area_factor=0.5)
        print(f"  mu={mu:<6g} P2 ratio {r.p2_ratio:.4f} (low-flux {r.p2_ratio_asymptotic}), "
              f"P3 ratio {r.p3_ratio:.4f} (low-flux {r.p3_ratio_asymptotic}) [{r.regime}]")

    print("\nP2 vs telescope diameter at the reference flux, 50 km:")
    for d in np.array([0.25, 0.5, 1.0, 2.0, 4.0]):
        geom = ps.ExperimentGeometry.symmetric(ps.TelescopeConfig(d, 0.5), ps.LinkGeometry(50.0))
        print(f"  d={d:4.2f} m  P2={geom.coincidence([ps.REFERENCE_FLUX] * 2):.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
