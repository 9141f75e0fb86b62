"""Print the strong coin flip operating point and check it against the honest circuit."""

from photonic_coinflip import adversary, protocol
from photonic_coinflip.protocol import ProtocolParams


def main():
    res = adversary.scf_solve()
    for key, value in res.to_dict().items():
        print(f"{key:8s} {value:.9f}")
    honest = protocol.honest_simulated(ProtocolParams(res.x, res.y, res.z))
    print(f"simulated P_h^A {honest.p_alice_wins:.9f} (p = {res.p:.9f}), abort {honest.p_abort:.1e}")


if __name__ == "__main__":
    main()
