"""Scan the verification reflectivity z for the longest advantage range."""

import argparse

import numpy as np

from photonic_coinflip import solver


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--detector-eff", type=float, nargs="+", default=[0.90, 0.95, 0.99])
    ap.add_argument("--z-min", type=float, default=0.45)
    ap.add_argument("--z-max", type=float, default=0.75)
    ap.add_argument("--z-step", type=float, default=0.01)
    ap.add_argument("--d-max", type=float, default=3.0)
    args = ap.parse_args()

    zs = np.round(np.arange(args.z_min, args.z_max + 1e-9, args.z_step), 6)
    ds = solver.distance_grid(0.0, args.d_max, 0.05)
    print("detector_eff,best_z,last_advantage_km")
    for eta in args.detector_eff:
        z, reach = solver.best_z_for_range(zs, eta, ds)
        print(f"{eta},{z},{reach}")


if __name__ == "__main__":
    main()
