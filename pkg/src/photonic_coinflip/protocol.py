"""Honest single-photon weak coin flip: closed forms and circuit simulation.

Mode layout (0-based): mode 0 stays in Alice's lab, mode 1 travels to Bob,
mode 2 is Bob's ancilla whose detector announces the bit ``c``.

Alice wins when Bob announces ``c = 0`` and his final detectors read
(click, no click) on modes (0, 1).  Bob wins when he announces ``c = 1`` and
Alice's detector on mode 0 stays silent.  Everything else is an abort.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from math import sqrt

from . import fock
from .errors import (
    DegenerateDenominator,
    TruncationTooSmall,
    WrongModeCount,
    XOutOfFairRange,
)
from .fock import CLICK, NO_CLICK, BeamSplitterSpec, DetectorModel, FockBasis


def _unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class ProtocolParams:
    """Beam-splitter reflectivities ``x`` (Alice), ``y`` and ``z`` (Bob)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            _unit(name, getattr(self, name))

    @classmethod
    def fair_family(cls, x: float) -> ProtocolParams:
        """Lossless fair, abort-free point ``(x, 1 - 1/(2(1-x)), 2x)``."""
        return cls(x, fair_y(x), 2.0 * x)

    @classmethod
    def no_abort(cls, x: float, y: float) -> ProtocolParams:
        return cls(x, y, no_abort_z(x, y))


@dataclass(frozen=True)
class LossBudget:
    eta_t: float = 1.0
    eta_f_a: float = 1.0
    eta_f_b: float = 1.0
    eta_d_a: float = 1.0
    eta_d_b: float = 1.0
    p_dc: float = 0.0

    def __post_init__(self):
        for name in ("eta_t", "eta_f_a", "eta_f_b"):
            _unit(name, getattr(self, name))
        for name in ("eta_d_a", "eta_d_b"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if not 0.0 <= self.p_dc < 1.0:
            raise ValueError(f"p_dc must be in [0, 1), got {self.p_dc}")

    @property
    def is_lossless(self) -> bool:
        return all(v == 1.0 for v in (self.eta_t, self.eta_f_a, self.eta_f_b, self.eta_d_a, self.eta_d_b))

    def detector_a(self) -> DetectorModel:
        return DetectorModel(efficiency=self.eta_d_a, dark_count=self.p_dc)

    def detector_b(self) -> DetectorModel:
        return DetectorModel(efficiency=self.eta_d_b, dark_count=self.p_dc)


LOSSLESS = LossBudget()


@dataclass(frozen=True)
class OutcomeDistribution:
    p_alice_wins: float
    p_bob_wins: float
    p_abort: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_alice_wins, self.p_bob_wins, self.p_abort)

    def max_deviation(self, other: OutcomeDistribution) -> float:
        return max(abs(a - b) for a, b in zip(self.as_tuple(), other.as_tuple()))

    def to_dict(self) -> dict:
        return asdict(self)


def fair_y(x: float) -> float:
    """Bob's reflectivity that makes the lossless protocol fair."""
    if not 0.0 <= x <= 0.5:
        raise XOutOfFairRange(f"fair family needs x in [0, 1/2], got {x}")
    return 1.0 - 1.0 / (2.0 * (1.0 - x))


def no_abort_z(x: float, y: float) -> float:
    """Verification reflectivity for which the lossless honest run never aborts."""
    denom = 1.0 - (1.0 - x) * (1.0 - y)
    if denom <= 0.0:
        raise DegenerateDenominator(f"(1-x)(1-y) = 1 for x={x}, y={y}")
    # denom >= x, so only rounding can push the ratio past 1
    return min(x / denom, 1.0)


def honest_closed_form(params: ProtocolParams, losses: LossBudget = LOSSLESS) -> OutcomeDistribution:
    x, y, z = params.x, params.y, params.z
    scale = losses.eta_t * losses.eta_d_b
    amp = sqrt(x * z * losses.eta_f_a) + sqrt((1.0 - x) * y * (1.0 - z) * losses.eta_f_b)
    p_a = scale * amp**2
    p_b = scale * (1.0 - x) * (1.0 - y)
    return OutcomeDistribution(p_a, p_b, 1.0 - p_a - p_b)


def honest_simulated(
    params: ProtocolParams,
    losses: LossBudget = LOSSLESS,
    basis: FockBasis | None = None,
) -> OutcomeDistribution:
    """Run the lossy honest circuit on the Fock engine.

    Bob's announcement is handled by conditioning on his detector outcome,
    so the result is exact.  The return leg for ``c = 0`` carries a second
    channel loss ``eta_t`` on mode 0, as in the lossy amplitude chain the
    closed form is derived from.
    """
    basis = basis or FockBasis(3, 1)
    if basis.mode_count != 3:
        raise WrongModeCount(f"honest circuit needs 3 modes, got {basis.mode_count}")
    if basis.max_total_photons < 1:
        raise TruncationTooSmall("honest circuit needs room for one photon")
    det_a, det_b = losses.detector_a(), losses.detector_b()

    rho = fock.prepare_fock(basis, (1, 0, 0))
    rho = fock.apply_beamsplitter(rho, BeamSplitterSpec(params.x, (0, 1)))
    rho = fock.apply_loss(rho, 0, losses.eta_f_a)
    rho = fock.apply_loss(rho, 1, losses.eta_t)
    rho = fock.apply_beamsplitter(rho, BeamSplitterSpec(params.y, (1, 2)))

    p_c1, after_c1 = fock.measure(rho, [None, None, CLICK], [None, None, det_b])
    p_c0, after_c0 = fock.measure(rho, [None, None, NO_CLICK], [None, None, det_b])

    p_bob = 0.0
    if after_c1 is not None:
        p_bob = p_c1 * fock.outcome_probability(after_c1, [NO_CLICK, None, None], [det_a, None, None])

    p_alice = 0.0
    if after_c0 is not None:
        st = fock.apply_loss(after_c0, 0, losses.eta_t)
        st = fock.apply_loss(st, 1, losses.eta_f_b)
        st = fock.apply_beamsplitter(st, BeamSplitterSpec(params.z, (0, 1)))
        p_alice = p_c0 * fock.outcome_probability(st, [CLICK, NO_CLICK, None], [det_b, det_b, None])

    return OutcomeDistribution(p_alice, p_bob, 1.0 - p_alice - p_bob)
