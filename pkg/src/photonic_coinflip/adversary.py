"""Optimal cheating strategies for both parties, and the derived strong coin flip.

Closed forms live next to an exact eigenvalue oracle
(:func:`alice_cheat_bruteforce`) that maximizes dishonest Alice's winning
probability over every two-mode input state of the truncated Fock space.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from . import fock
from .errors import (
    DegenerateDenominator,
    DegenerateEfficiency,
    NoRootInUnitInterval,
    TruncationTooSmall,
    WrongModeCount,
)
from .fock import (
    CLICK,
    NO_CLICK,
    DetectorKind,
    DetectorModel,
    FockBasis,
    QuantumState,
)
from .protocol import LOSSLESS, LossBudget, ProtocolParams

log = logging.getLogger(__name__)

SCAN_MIN_LENGTH = 200


@dataclass(frozen=True, eq=False)
class CheatReport:
    p_d_alice: float
    p_d_bob: float
    l_one: int
    alice_optimal_state: QuantumState

    @property
    def bias(self) -> float:
        return max(self.p_d_alice, self.p_d_bob) - 0.5


def bob_cheat(params: ProtocolParams, losses: LossBudget = LOSSLESS) -> float:
    """Bob announces ``c = 1`` and discards his half; he loses only if Alice clicks."""
    return 1.0 - params.x * losses.eta_f_a * losses.eta_d_a


def bob_caught_probability(params: ProtocolParams, losses: LossBudget = LOSSLESS) -> float:
    return params.x * losses.eta_f_a * losses.eta_d_a


def alice_cheat_lossless(params: ProtocolParams) -> float:
    return 1.0 - (1.0 - params.y) * (1.0 - params.z)


def _photon_number_objective(r: float, s: float, l: int | np.ndarray):
    return r**l - s**l


def optimal_photon_number(y: float, z: float, eta_f: float, eta_d: float) -> tuple[float, int]:
    """Maximize ``r**l - s**l`` over integers ``l >= 1``.

    ``r = 1 - eta_d (1 - y eta_f)(1 - z)`` and ``s = 1 - eta_d``.  The real
    maximizer ``lam = ln(ln s / ln r) / (ln r - ln s)`` is rounded both ways
    and the better neighbour kept (the smaller one on ties).  An exhaustive
    scan over ``1..max(200, ceil(3 lam))`` double-checks it and wins on
    disagreement.
    """
    if eta_d <= 0.0:
        raise DegenerateEfficiency("Bob's detectors never click (eta_d = 0)")
    r = 1.0 - eta_d * (1.0 - y * eta_f) * (1.0 - z)
    s = 1.0 - eta_d
    if s == 0.0:
        return r, 1
    if r >= 1.0:
        raise DegenerateEfficiency(
            f"r = 1 (y*eta_f = {y * eta_f}, z = {z}): objective increases forever, no finite optimum"
        )
    if r <= s:
        return 0.0, 1

    lam = math.log(math.log(s) / math.log(r)) / (math.log(r) - math.log(s))
    lo = max(1, math.floor(lam))
    hi = max(1, math.ceil(lam))
    l_one = lo if _photon_number_objective(r, s, lo) >= _photon_number_objective(r, s, hi) else hi

    length = max(SCAN_MIN_LENGTH, math.ceil(3 * lam))
    ls = np.arange(1, length + 1)
    vals = _photon_number_objective(r, s, ls.astype(float))
    scanned = int(ls[np.argmax(vals)])
    if vals[scanned - 1] > _photon_number_objective(r, s, l_one):
        log.warning("l1 rounding picked %d, scan found %d; using scan", l_one, scanned)
        l_one = scanned
    return float(_photon_number_objective(r, s, l_one)), l_one


def alice_cheat_lossy(params: ProtocolParams, losses: LossBudget = LOSSLESS) -> tuple[float, int]:
    """Closed-form lossy cheating probability of Alice and her photon number ``l1``.

    Only Bob's delay line and detectors enter.  The expression is exact when
    Bob's delay line is lossless or when ``l1 = 1``.  For a lossy delay line
    with ``l1 >= 2`` it falls below the true optimum reported by
    :func:`alice_cheat_bruteforce`, but it never exceeds the lossless value.
    """
    return optimal_photon_number(params.y, params.z, losses.eta_f_b, losses.eta_d_b)


def _state_reflectivity(y: float, z: float, eta_f: float) -> float:
    denom = y * eta_f + z - y * z * eta_f
    if denom <= 0.0:
        raise DegenerateDenominator("y = z = 0: every input state wins with probability 0")
    return y * (1.0 - z) * eta_f / denom


def alice_optimal_state(
    params: ProtocolParams,
    losses: LossBudget = LOSSLESS,
    basis: FockBasis | None = None,
) -> QuantumState:
    """``(1 x R(pi)) H(a) |0, l1>`` on Alice's two modes.

    With no losses ``l1 = 1`` and this is
    ``sqrt(z/b)|10> + sqrt(y(1-z)/b)|01>`` with ``b = 1-(1-y)(1-z)``.
    """
    _, l_one = alice_cheat_lossy(params, losses)
    basis = basis or FockBasis(2, l_one)
    if basis.mode_count != 2:
        raise WrongModeCount("Alice's state lives on two modes")
    if basis.max_total_photons < l_one:
        raise TruncationTooSmall(f"need cap >= l1 = {l_one}, got {basis.max_total_photons}")
    a = _state_reflectivity(params.y, params.z, losses.eta_f_b)
    state = fock.prepare_fock(basis, (0, l_one))
    state = fock.apply_beamsplitter(state, fock.BeamSplitterSpec(a, (0, 1)))
    return fock.apply_phase(state, 1, math.pi)


def alice_cheat_operator(
    params: ProtocolParams,
    losses: LossBudget = LOSSLESS,
    truncation: int = 3,
    detector_kind: DetectorKind = DetectorKind.THRESHOLD,
) -> tuple[np.ndarray, FockBasis]:
    """Winning-probability operator on Alice's two input modes.

    The (1, 0, 0) success element is pulled back through Bob's circuit in
    the Heisenberg picture: BS(y) on modes 1-2, delay-line loss on mode 1,
    BS(z) on modes 0-1, then detectors of efficiency ``eta_d_b``.  The result
    is restricted to inputs with mode 2 in vacuum and returned on a two-mode
    basis with the same photon cap.
    """
    full = FockBasis(3, truncation)
    if detector_kind is DetectorKind.THRESHOLD:
        det = losses.detector_b()
        pattern = [CLICK, NO_CLICK, NO_CLICK]
    else:
        det = DetectorModel(DetectorKind.NUMBER_RESOLVING, efficiency=losses.eta_d_b)
        pattern = [1, 0, 0]
    obs = np.diag(fock.povm_diagonal(full, pattern, det))

    u_z = fock.beamsplitter_unitary(full, (0, 1), params.z)
    obs = u_z.T @ obs @ u_z
    if losses.eta_f_b != 1.0:
        obs = sum(k.T @ obs @ k for k in fock.loss_kraus(full, 1, losses.eta_f_b))
    u_y = fock.beamsplitter_unitary(full, (1, 2), params.y)
    obs = u_y.T @ obs @ u_y

    alice = FockBasis(2, truncation)
    idx = [full.index((n0, n1, 0)) for n0, n1 in alice.states]
    m = obs[np.ix_(idx, idx)]
    return (m + m.T) / 2, alice


def alice_cheat_bruteforce(
    params: ProtocolParams,
    losses: LossBudget = LOSSLESS,
    basis: FockBasis | None = None,
    detector_kind: DetectorKind = DetectorKind.THRESHOLD,
) -> tuple[float, QuantumState]:
    """Largest eigenvalue of the winning operator and its eigenvector.

    Maximizing over pure inputs suffices since the winning probability is
    linear in the input state.  ``basis`` is the three-mode circuit basis;
    by default its cap is ``l1 + 2`` with ``l1`` from the closed form.
    """
    try:
        _, l_one = alice_cheat_lossy(params, losses)
    except DegenerateEfficiency:
        l_one = 1
    if basis is None:
        basis = FockBasis(3, l_one + 2)
    if basis.mode_count != 3:
        raise WrongModeCount("the cheating circuit has three modes")
    if basis.max_total_photons < l_one + 2:
        raise TruncationTooSmall(
            f"cap {basis.max_total_photons} < l1 + 2 = {l_one + 2}"
        )
    m, alice = alice_cheat_operator(params, losses, basis.max_total_photons, detector_kind)
    w, v = np.linalg.eigh(m)
    return float(w[-1]), QuantumState.from_ket(alice, v[:, -1])


def alice_win_probability(
    state: QuantumState,
    params: ProtocolParams,
    losses: LossBudget = LOSSLESS,
    detector_kind: DetectorKind = DetectorKind.THRESHOLD,
) -> float:
    """Winning probability of a given two-mode input against honest Bob."""
    m, alice = alice_cheat_operator(
        params, losses, state.basis.max_total_photons, detector_kind
    )
    if alice != state.basis:
        raise WrongModeCount("state must live on a two-mode basis")
    return float(np.real(np.trace(m @ state.matrix)))


def cheat_report(
    params: ProtocolParams, losses: LossBudget = LOSSLESS
) -> CheatReport:
    p_a, l_one = alice_cheat_lossy(params, losses)
    return CheatReport(
        p_d_alice=p_a,
        p_d_bob=bob_cheat(params, losses),
        l_one=l_one,
        alice_optimal_state=alice_optimal_state(params, losses),
    )


def classical_lose_limit(y: float, eta: float, n: int) -> float:
    """Probability that Alice, sending ``n`` photons, makes Bob announce ``c = 1``."""
    return 1.0 - (y + (1.0 - eta) * (1.0 - y)) ** n


def classical_lose_limit_simulated(y: float, eta: float, n: int) -> float:
    """Same quantity by running ``H(y)|n, 0>`` through a threshold detector."""
    basis = FockBasis(2, n)
    state = fock.prepare_fock(basis, (n, 0))
    state = fock.apply_beamsplitter(state, fock.BeamSplitterSpec(y, (0, 1)))
    return fock.outcome_probability(state, [None, CLICK], [None, DetectorModel(efficiency=eta)])


# strong coin flipping ---------------------------------------------------------


@dataclass(frozen=True)
class ScfResult:
    x: float
    y: float
    z: float
    p: float
    epsilon: float
    bias: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("x", "y", "z", "p", "epsilon", "bias")}


def scf_bias(p: float, epsilon: float) -> float:
    """Bias of the strong coin flip built from an unbalanced weak one.

    The weak protocol is characterized by honest win probabilities
    ``(p, 1-p)`` and cheating probabilities ``(p+eps, 1-p+eps)``.
    """
    return max(0.5 - (p - epsilon) / 2.0, 1.0 / (2.0 - (p + epsilon)) - 0.5)


def _scf_x(y: float) -> float:
    return y * y / ((1.0 - y) * (1.0 - 2.0 * y))


def _scf_z(y: float) -> float:
    return y / (1.0 - y) ** 2


def _scf_residual(y: float) -> float:
    x, z = _scf_x(y), _scf_z(y)
    return 1.0 - x / 2.0 - 1.0 / (2.0 - y - z + y * z)


def scf_residuals(x: float, y: float, z: float) -> tuple[float, float, float]:
    return (
        x - _scf_x(y),
        z - _scf_z(y),
        1.0 - x / 2.0 - 1.0 / (2.0 - y - z + y * z),
    )


def scf_solve(tol: float = 1e-14, grid: int = 2000) -> ScfResult:
    """Solve the SCF parameter system by bisection in ``y`` on (0, 1/2).

    ``x`` and ``z`` are eliminated through their closed forms in ``y``.  The
    interval is first scanned for sign changes so that a root with
    ``x, z`` outside [0, 1] is never returned by accident.
    """
    ys = np.linspace(0.0, 0.5, grid + 1)[1:-1]
    vals = np.array([_scf_residual(t) for t in ys])
    for a, b, fa, fb in zip(ys[:-1], ys[1:], vals[:-1], vals[1:]):
        if fa * fb > 0:
            continue
        y = bisect(_scf_residual, a, b, xtol=tol)
        x, z = _scf_x(y), _scf_z(y)
        if 0.0 <= x <= 1.0 and 0.0 <= z <= 1.0:
            break
    else:
        raise NoRootInUnitInterval("no root of the SCF system with x, y, z in [0, 1]")

    p = 1.0 - (1.0 - x) * (1.0 - y)
    p_d_alice = 1.0 - (1.0 - y) * (1.0 - z)
    p_d_bob = 1.0 - x
    eps = p_d_alice - p
    if abs(p_d_bob - (1.0 - p + eps)) > 1e-9:
        raise NoRootInUnitInterval(
            f"root does not give P_d^B = 1 - p + eps (off by {p_d_bob - (1 - p + eps):.2e})"
        )
    return ScfResult(x, y, z, p, eps, scf_bias(p, eps))
