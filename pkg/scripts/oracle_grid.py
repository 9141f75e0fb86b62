"""Compare the lossy closed form for Alice's cheating probability with the
eigen-oracle on a (y, z, eta_f, eta_d) grid and print every disagreement."""

import argparse
import itertools

from photonic_coinflip import adversary
from photonic_coinflip.fock import FockBasis
from photonic_coinflip.protocol import LossBudget, ProtocolParams


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()

    grid = (0.2, 0.4, 0.6, 0.8)
    print("y,z,eta_f,eta_d,l_one,closed_form,oracle,analytic_state")
    bad = 0
    for y, z, ef, ed in itertools.product(grid, grid, (0.8, 0.9, 1.0), (0.5, 0.75, 1.0)):
        params, losses = ProtocolParams(0.0, y, z), LossBudget(eta_f_b=ef, eta_d_b=ed)
        closed, l_one = adversary.alice_cheat_lossy(params, losses)
        value, _ = adversary.alice_cheat_bruteforce(params, losses)
        if abs(value - closed) <= args.tol:
            continue
        bad += 1
        state = adversary.alice_optimal_state(params, losses, FockBasis(2, l_one + 2))
        achieved = adversary.alice_win_probability(state, params, losses)
        print(f"{y},{z},{ef},{ed},{l_one},{closed:.9f},{value:.9f},{achieved:.9f}")
    print(f"# {bad}/144 points differ by more than {args.tol:g}")


if __name__ == "__main__":
    main()
