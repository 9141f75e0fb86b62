"""Density-matrix simulation of few-mode passive linear optics.

The Hilbert space is truncated by a *global* cap on the total photon number,
so beam splitters, phase shifts and losses never leak out of it: each of
them conserves or lowers the total photon number.

Modes are indexed from 0 in code.  Basis states are ordered graded
lexicographically: first by total photon number, then by ascending
lexicographic order of the occupation tuple within each grade.  With three
modes and a cap of 1 this gives ``(0,0,0), (0,0,1), (0,1,0), (1,0,0)``.

A beam splitter of reflectivity ``r`` on modes ``(k, l)`` maps creation
operators through the real symmetric matrix::

    H(r) = [[sqrt(r),    sqrt(1-r)],
            [sqrt(1-r), -sqrt(r)  ]]

so a single photon in mode ``k`` becomes ``sqrt(r)|1_k> + sqrt(1-r)|1_l>``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import comb, factorial, sqrt
from typing import Sequence, Union

import numpy as np

from .errors import (
    EfficiencyOutOfRange,
    ModeOutOfRange,
    OccupationExceedsTruncation,
    PatternModeMismatch,
    WrongModeCount,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

# Per-mode outcome labels for measurement patterns.  An ``int`` entry means
# an exact photon count (number-resolving detector) and ``None`` leaves the
# mode unmeasured.
NO_CLICK = "no_click"
CLICK = "click"
Outcome = Union[str, int, None]


@dataclass(frozen=True)
class FockBasis:
    """All occupation tuples of ``mode_count`` modes with total <= cap."""

    mode_count: int
    max_total_photons: int

    def __post_init__(self):
        if self.mode_count < 1:
            raise ValueError(f"mode_count must be positive, got {self.mode_count}")
        if self.max_total_photons < 0:
            raise ValueError("max_total_photons must be non-negative")

    @cached_property
    def states(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for total in range(self.max_total_photons + 1):
            grade = [
                occ
                for occ in itertools.product(range(total + 1), repeat=self.mode_count)
                if sum(occ) == total
            ]
            out.extend(sorted(grade))
        return tuple(out)

    @cached_property
    def occupations(self) -> np.ndarray:
        """(dim, mode_count) integer array of occupation numbers."""
        return np.array(self.states, dtype=int).reshape(len(self.states), self.mode_count)

    @cached_property
    def _lookup(self) -> dict[tuple[int, ...], int]:
        return {s: i for i, s in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, occupations: Sequence[int]) -> int:
        occ = tuple(int(n) for n in occupations)
        if len(occ) != self.mode_count:
            raise WrongModeCount(f"expected {self.mode_count} modes, got {len(occ)}")
        if any(n < 0 for n in occ):
            raise ValueError(f"negative occupation in {occ}")
        if sum(occ) > self.max_total_photons:
            raise OccupationExceedsTruncation(
                f"{occ} has {sum(occ)} photons, cap is {self.max_total_photons}"
            )
        return self._lookup[occ]

    def total_photons(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.mode_count:
            raise ModeOutOfRange(f"mode {mode} not in [0, {self.mode_count})")


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A (possibly unnormalized) density operator on a truncated Fock space.

    Construction only checks shape and Hermiticity.  Call :meth:`validate`
    for the positivity and trace checks.
    """

    basis: FockBasis
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(f"matrix shape {m.shape} does not match basis dim {self.basis.dim}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_ket(cls, basis: FockBasis, ket: np.ndarray) -> QuantumState:
        ket = np.asarray(ket, dtype=complex)
        return cls(basis, np.outer(ket, ket.conj()))

    @classmethod
    def from_amplitudes(
        cls, basis: FockBasis, amplitudes: dict[tuple[int, ...], complex]
    ) -> QuantumState:
        """Pure state from a ``{occupation tuple: amplitude}`` mapping."""
        ket = np.zeros(basis.dim, dtype=complex)
        for occ, amp in amplitudes.items():
            ket[basis.index(occ)] += amp
        return cls.from_ket(basis, ket)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    @property
    def trace_deficit(self) -> float:
        """Weight missing from unit trace (truncation leakage or a sub-normalized branch)."""
        return 1.0 - self.trace

    def probabilities(self) -> np.ndarray:
        """Occupation-basis populations (the diagonal)."""
        return np.real(np.diag(self.matrix)).copy()

    def photon_number_distribution(self) -> np.ndarray:
        dist = np.zeros(self.basis.max_total_photons + 1)
        np.add.at(dist, self.basis.total_photons(), self.probabilities())
        return dist

    def normalized(self) -> QuantumState:
        return QuantumState(self.basis, self.matrix / self.trace)

    def amplitude_weight(self, occupations: Sequence[int]) -> float:
        i = self.basis.index(occupations)
        return float(np.real(self.matrix[i, i]))

    def fidelity_with_pure(self, other: QuantumState) -> float:
        """<phi|rho|phi> where ``other`` is assumed rank one and normalized."""
        w, v = np.linalg.eigh(other.matrix)
        phi = v[:, -1]
        return float(np.real(phi.conj() @ self.matrix @ phi))

    def validate(
        self,
        psd_tol: float = PSD_TOL,
        truncation_tolerance: float = 0.0,
        trace_tol: float = TRACE_TOL,
    ) -> None:
        """Raise ``ValueError`` if this is not a physical normalized state."""
        smallest = float(np.linalg.eigvalsh(self.matrix)[0])
        if smallest < -psd_tol:
            raise ValueError(f"not positive semidefinite (min eigenvalue {smallest:.3e})")
        tr = self.trace
        if not (1.0 - truncation_tolerance - trace_tol <= tr <= 1.0 + trace_tol):
            raise ValueError(f"trace {tr!r} outside allowed range")


def _check_efficiency(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise EfficiencyOutOfRange(f"efficiency must be in [0, 1], got {eta}")


class DetectorKind(enum.Enum):
    THRESHOLD = "threshold"
    NUMBER_RESOLVING = "number_resolving"


@dataclass(frozen=True)
class DetectorModel:
    kind: DetectorKind = DetectorKind.THRESHOLD
    efficiency: float = 1.0
    dark_count: float = 0.0

    def __post_init__(self):
        _check_efficiency(self.efficiency)
        if not 0.0 <= self.dark_count < 1.0:
            raise ValueError(f"dark_count must be in [0, 1), got {self.dark_count}")
        if self.kind is DetectorKind.NUMBER_RESOLVING and self.dark_count > 0:
            raise ValueError("dark counts are only modelled for threshold detectors")

    def no_click_weights(self, n: np.ndarray) -> np.ndarray:
        """Eigenvalues of the no-click element on photon numbers ``n``."""
        return (1.0 - self.dark_count) * (1.0 - self.efficiency) ** np.asarray(n, dtype=float)

    def count_weights(self, n: np.ndarray, count: int) -> np.ndarray:
        """Eigenvalues of the "exactly ``count`` photons registered" element."""
        n = np.asarray(n, dtype=int)
        eta = self.efficiency
        out = np.zeros(n.shape)
        for i, m in np.ndenumerate(n):
            if m >= count:
                out[i] = comb(int(m), count) * eta**count * (1.0 - eta) ** (m - count)
        return out

    def weights(self, n: np.ndarray, outcome: Outcome) -> np.ndarray:
        if outcome is None:
            return np.ones(np.shape(n))
        if outcome == NO_CLICK:
            return self.no_click_weights(n)
        if outcome == CLICK:
            return 1.0 - self.no_click_weights(n)
        if isinstance(outcome, (int, np.integer)) and not isinstance(outcome, bool):
            if self.kind is not DetectorKind.NUMBER_RESOLVING:
                raise PatternModeMismatch("exact photon counts need a number-resolving detector")
            if outcome < 0:
                raise PatternModeMismatch(f"negative photon count {outcome}")
            return self.count_weights(n, int(outcome))
        raise PatternModeMismatch(f"unknown outcome {outcome!r}")


PERFECT_THRESHOLD = DetectorModel()
PERFECT_RESOLVING = DetectorModel(DetectorKind.NUMBER_RESOLVING)


def prepare_fock(basis: FockBasis, occupations: Sequence[int]) -> QuantumState:
    """Pure Fock state ``|n_1 ... n_m><n_1 ... n_m|``."""
    i = basis.index(occupations)
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    rho[i, i] = 1.0
    return QuantumState(basis, rho)


def vacuum(basis: FockBasis) -> QuantumState:
    return prepare_fock(basis, (0,) * basis.mode_count)


def beamsplitter_matrix(reflectivity: float) -> np.ndarray:
    r = reflectivity
    return np.array([[sqrt(r), sqrt(1 - r)], [sqrt(1 - r), -sqrt(r)]])


def _two_mode_image(h: np.ndarray, p: int, q: int) -> dict[tuple[int, int], float]:
    """Expand ``(a_k'^p a_l'^q)/sqrt(p!q!) |00>`` where a_j' = sum_i h[i, j] a_i."""
    out: dict[tuple[int, int], float] = {}
    norm = sqrt(factorial(p) * factorial(q))
    for i in range(p + 1):
        ci = comb(p, i) * h[0, 0] ** i * h[1, 0] ** (p - i)
        if ci == 0.0:
            continue
        for j in range(q + 1):
            c = ci * comb(q, j) * h[0, 1] ** j * h[1, 1] ** (q - j)
            if c == 0.0:
                continue
            s, t = i + j, p + q - i - j
            out[(s, t)] = out.get((s, t), 0.0) + c * sqrt(factorial(s) * factorial(t)) / norm
    return out


@lru_cache(maxsize=512)
def _two_mode_unitary(basis: FockBasis, k: int, l: int, h_key: tuple[float, ...]) -> np.ndarray:
    h = np.array(h_key).reshape(2, 2)
    u = np.zeros((basis.dim, basis.dim))
    for col, occ in enumerate(basis.states):
        for (s, t), amp in _two_mode_image(h, occ[k], occ[l]).items():
            new = list(occ)
            new[k], new[l] = s, t
            u[basis._lookup[tuple(new)], col] += amp
    u.setflags(write=False)
    return u


def two_mode_unitary(basis: FockBasis, modes: tuple[int, int], h: np.ndarray) -> np.ndarray:
    """Fock-space lift of a real 2x2 mode transformation acting on ``modes``."""
    k, l = modes
    basis.check_mode(k)
    basis.check_mode(l)
    if k == l:
        raise ModeOutOfRange("beam splitter needs two distinct modes")
    return _two_mode_unitary(basis, k, l, tuple(float(v) for v in np.ravel(h)))


def beamsplitter_unitary(basis: FockBasis, modes: tuple[int, int], reflectivity: float) -> np.ndarray:
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError(f"reflectivity must be in [0, 1], got {reflectivity}")
    return two_mode_unitary(basis, modes, beamsplitter_matrix(reflectivity))


@dataclass(frozen=True)
class BeamSplitterSpec:
    reflectivity: float
    modes: tuple[int, int]

    def __post_init__(self):
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValueError(f"reflectivity must be in [0, 1], got {self.reflectivity}")
        if self.modes[0] == self.modes[1]:
            raise ModeOutOfRange("beam splitter needs two distinct modes")

    @property
    def matrix(self) -> np.ndarray:
        return beamsplitter_matrix(self.reflectivity)


def _conjugate(state: QuantumState, u: np.ndarray) -> QuantumState:
    rho = u @ state.matrix @ u.conj().T
    return QuantumState(state.basis, (rho + rho.conj().T) / 2)


def apply_beamsplitter(state: QuantumState, bs: BeamSplitterSpec) -> QuantumState:
    return _conjugate(state, beamsplitter_unitary(state.basis, bs.modes, bs.reflectivity))


def phase_unitary(basis: FockBasis, mode: int, phase: float) -> np.ndarray:
    basis.check_mode(mode)
    return np.diag(np.exp(1j * phase * basis.occupations[:, mode]))


def apply_phase(state: QuantumState, mode: int, phase: float) -> QuantumState:
    return _conjugate(state, phase_unitary(state.basis, mode, phase))


@lru_cache(maxsize=512)
def _loss_kraus(basis: FockBasis, mode: int, eta: float) -> tuple[np.ndarray, ...]:
    ops = []
    for k in range(basis.max_total_photons + 1):
        op = np.zeros((basis.dim, basis.dim))
        for col, occ in enumerate(basis.states):
            n = occ[mode]
            if n < k:
                continue
            w = comb(n, k) * eta ** (n - k) * (1.0 - eta) ** k
            if w == 0.0:
                continue
            new = list(occ)
            new[mode] = n - k
            op[basis._lookup[tuple(new)], col] = sqrt(w)
        if op.any():
            op.setflags(write=False)
            ops.append(op)
    return tuple(ops)


def loss_kraus(basis: FockBasis, mode: int, efficiency: float) -> tuple[np.ndarray, ...]:
    """Kraus operators ``K_k`` of a pure-loss channel; ``k`` photons are lost."""
    basis.check_mode(mode)
    _check_efficiency(efficiency)
    return _loss_kraus(basis, mode, float(efficiency))


def apply_loss(state: QuantumState, mode: int, efficiency: float) -> QuantumState:
    if efficiency == 1.0:
        state.basis.check_mode(mode)
        return state
    rho = sum(k @ state.matrix @ k.T for k in loss_kraus(state.basis, mode, efficiency))
    return QuantumState(state.basis, (rho + rho.conj().T) / 2)


def povm_no_click(basis: FockBasis, mode: int, det: DetectorModel) -> np.ndarray:
    """Dense no-click POVM element on ``mode`` (identity on the others)."""
    basis.check_mode(mode)
    return np.diag(det.no_click_weights(basis.occupations[:, mode]))


def _detectors_for(basis: FockBasis, detectors) -> list[DetectorModel]:
    if isinstance(detectors, DetectorModel):
        return [detectors] * basis.mode_count
    detectors = list(detectors)
    if len(detectors) != basis.mode_count:
        raise PatternModeMismatch(
            f"{len(detectors)} detectors given for {basis.mode_count} modes"
        )
    return [PERFECT_THRESHOLD if d is None else d for d in detectors]


def povm_diagonal(
    basis: FockBasis,
    pattern: Sequence[Outcome],
    detectors: DetectorModel | Sequence[DetectorModel | None] = PERFECT_THRESHOLD,
) -> np.ndarray:
    """Diagonal of the product POVM element for ``pattern``.

    Every detector element here is diagonal in the occupation basis, so the
    tensor product reduces to a per-basis-state product of weights.
    """
    pattern = list(pattern)
    if len(pattern) != basis.mode_count:
        raise PatternModeMismatch(f"pattern has {len(pattern)} entries for {basis.mode_count} modes")
    dets = _detectors_for(basis, detectors)
    w = np.ones(basis.dim)
    for mode, (outcome, det) in enumerate(zip(pattern, dets)):
        if outcome is not None:
            w = w * det.weights(basis.occupations[:, mode], outcome)
    return w


def outcome_probability(
    state: QuantumState,
    pattern: Sequence[Outcome],
    detectors: DetectorModel | Sequence[DetectorModel | None] = PERFECT_THRESHOLD,
) -> float:
    """``Tr[rho Pi_pattern]``; modes marked ``None`` are traced out."""
    w = povm_diagonal(state.basis, pattern, detectors)
    return float(np.real(np.diag(state.matrix)) @ w)


def measure(
    state: QuantumState,
    pattern: Sequence[Outcome],
    detectors: DetectorModel | Sequence[DetectorModel | None] = PERFECT_THRESHOLD,
) -> tuple[float, QuantumState | None]:
    """Outcome probability and the normalized Lüders post-measurement state.

    The post-measurement state is ``None`` when the outcome has probability
    zero.
    """
    w = povm_diagonal(state.basis, pattern, detectors)
    p = float(np.real(np.diag(state.matrix)) @ w)
    if p <= 0.0:
        return 0.0, None
    s = np.sqrt(w)
    post = (s[:, None] * state.matrix * s[None, :]) / p
    return p, QuantumState(state.basis, post)
