"""Run the full pipeline from an INI spec and write the JSON report.

    python scripts/run_experiment.py scripts/configs/reference_chsh.ini [-o report.json]
"""

import argparse
import json
import sys

from cosmicbell.config import load_spec
from cosmicbell.pipeline import end_to_end


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("spec")
    ap.add_argument("-o", "--output")
    args = ap.parse_args(argv)

    report = end_to_end(load_spec(args.spec))
    text = json.dumps(report, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    c, b, runs = report["coincidence"], report["bell"], report["runs"]
    stat = f"S={b['S']:.4f}" if "S" in b else f"M={b['M']:.4f}"
    print(f"P_coincidence={c['p_coincidence']:.4f}  all-cosmic fraction={runs['all_cosmic_fraction']:.4f} "
          f"(expected {runs['expected_all_cosmic_fraction']:.4f})  {stat}", file=sys.stderr)
    if not args.output:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
