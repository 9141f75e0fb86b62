"""Single-photon weak coin flipping on a truncated Fock space."""

from .adversary import (
    alice_cheat_bruteforce,
    alice_cheat_lossless,
    alice_cheat_lossy,
    bob_cheat,
    cheat_report,
    scf_solve,
)
from .fock import DetectorKind, DetectorModel, FockBasis, QuantumState
from .protocol import LossBudget, ProtocolParams, honest_closed_form, honest_simulated
from .solver import LinkModel, link_budget, solve_fair_balanced, sweep

__version__ = "0.1.0"

__all__ = [
    "DetectorKind",
    "DetectorModel",
    "FockBasis",
    "LinkModel",
    "LossBudget",
    "ProtocolParams",
    "QuantumState",
    "alice_cheat_bruteforce",
    "alice_cheat_lossless",
    "alice_cheat_lossy",
    "bob_cheat",
    "cheat_report",
    "honest_closed_form",
    "honest_simulated",
    "link_budget",
    "scf_solve",
    "solve_fair_balanced",
    "sweep",
]
