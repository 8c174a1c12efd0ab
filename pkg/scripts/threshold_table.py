"""Threshold redshifts for independent sources, plus the CMB patch separation.

    python scripts/threshold_table.py [--config file.ini] [--sweep]

``--sweep`` adds the 2-way threshold on a grid of separations (CSV to stdout).
"""

import argparse
import sys

import numpy as np

from cosmicbell import causal
from cosmicbell.config import cosmology_from, read_config

ROWS = (("2-way space", 180.0, 2, 3.65), ("2-way ground", 130.0, 2, 4.13),
        ("3-way space", 120.0, 3, 4.37), ("3-way ground", 105.0, 3, 4.89))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--sweep", action="store_true")
    args = ap.parse_args(argv)
    params = cosmology_from(read_config(args.config) if args.config else None)

    print(f"{'row':14s} {'alpha':>6s} {'z_thr':>8s} {'table':>6s} {'diff':>7s}")
    for name, alpha, n, ref in ROWS:
        z = causal.threshold_redshift(alpha, n, params)
        print(f"{name:14s} {alpha:6.1f} {z:8.4f} {ref:6.2f} {z - ref:+7.4f}")
    a = causal.cmb_min_separation(params, 1090.0)
    print(f"\nCMB (z=1090) minimum patch separation: {a:.4f} deg "
          f"(closed form {causal.cmb_min_separation_closed_form(params, 1090.0):.4f})")

    if args.sweep:
        print("\nalpha_deg,z_threshold_2way")
        for alpha in np.linspace(40.0, 180.0, 29):
            try:
                z = causal.threshold_redshift(alpha, 2, params)
            except causal.InfeasibleError:
                z = float("nan")
            print(f"{alpha:.1f},{z:.5f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
