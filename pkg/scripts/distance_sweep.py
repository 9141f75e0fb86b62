"""Distance sweep for the fair, balanced protocol (data for the advantage plot).

Writes one CSV row per distance; the crossover distance goes to stderr.
"""

import argparse
import sys

from photonic_coinflip import solver
from photonic_coinflip.cli import SWEEP_FIELDS, sweep_rows, to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--detector-eff", type=float, default=0.95)
    ap.add_argument("--z", type=float, default=0.57)
    ap.add_argument("--d-max", type=float, default=2.0)
    ap.add_argument("--d-step", type=float, default=0.05)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    rows = solver.sweep(solver.distance_grid(0.0, args.d_max, args.d_step), args.z, args.detector_eff)
    text = to_csv(sweep_rows(rows), SWEEP_FIELDS)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(f"crossover: {solver.crossover_distance(rows)} km", file=sys.stderr)


if __name__ == "__main__":
    main()
