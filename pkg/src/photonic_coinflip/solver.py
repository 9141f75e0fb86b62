"""Fair, balanced operating points and their distance dependence.

For a fixed verification reflectivity ``z`` and loss budget, the fairness
condition gives ``y`` in closed form from ``x`` (:func:`fairness_y`) and the
balance condition gives ``x`` in closed form from ``y`` (:func:`balance_x`).
:func:`solve_fair_balanced` iterates the two to a fixed point and then
compares the quantum cheating probability with the best classical protocol
at the same abort rate, ``1 - sqrt(P_ab)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict, replace
from typing import Sequence

import numpy as np

from .adversary import alice_cheat_lossy, bob_cheat
from .errors import (
    CoinFlipError,
    NoConvergence,
    NoFairParameter,
    XOutOfUnitInterval,
    YOutOfUnitInterval,
)
from .protocol import LossBudget, ProtocolParams, honest_closed_form

FAIRNESS_TOL = 1e-12
BALANCE_TOL = 1e-12


@dataclass(frozen=True)
class LinkModel:
    distance_km: float = 0.0
    attenuation_db_per_km: float = 0.2
    switch_time_ns: float = 500.0
    group_velocity_km_per_s: float = 2.0e5

    def __post_init__(self):
        if self.distance_km < 0:
            raise ValueError("distance must be non-negative")
        if self.attenuation_db_per_km < 0 or self.switch_time_ns < 0:
            raise ValueError("attenuation and switch time must be non-negative")
        if self.group_velocity_km_per_s <= 0:
            raise ValueError("group velocity must be positive")

    @property
    def switch_fiber_km(self) -> float:
        return self.switch_time_ns * 1e-9 * self.group_velocity_km_per_s

    def transmission(self, length_km: float) -> float:
        return 10.0 ** (-self.attenuation_db_per_km * length_km / 10.0)


def link_budget(link: LinkModel, eta_d_a: float = 1.0, eta_d_b: float | None = None) -> LossBudget:
    """Channel and delay-line efficiencies for a given distance.

    Each delay line stores the photon for the channel round trip plus the
    optical switching time: ``eta_f = eta_s * eta_t**2``.
    """
    eta_t = link.transmission(link.distance_km)
    eta_s = link.transmission(link.switch_fiber_km)
    eta_f = eta_s * eta_t**2
    return LossBudget(
        eta_t=eta_t,
        eta_f_a=eta_f,
        eta_f_b=eta_f,
        eta_d_a=eta_d_a,
        eta_d_b=eta_d_a if eta_d_b is None else eta_d_b,
    )


def fairness_y(x: float, z: float, losses: LossBudget) -> float:
    """Bob's reflectivity ``y`` that equalizes the two honest winning probabilities.

    Fairness is a quadratic in ``sqrt(y)``; the non-negative root is taken.
    """
    if not 0.0 < x < 1.0:
        raise NoFairParameter(f"x must be in (0, 1), got {x}")
    ea, eb = losses.eta_f_a, losses.eta_f_b
    lead = (1.0 - z) * eb + 1.0
    radicand = (1.0 - x) * lead - x * z * ea
    if radicand < 0.0:
        bound = (1.0 - x) * (1.0 + eb) / (x * ea + (1.0 - x) * eb)
        raise NoFairParameter(f"z = {z} exceeds the fairness bound {bound:.6g} at x = {x}")
    root_y = (math.sqrt(radicand) - math.sqrt(x * z * (1.0 - z) * ea * eb)) / (math.sqrt(1.0 - x) * lead)
    if root_y < 0.0:
        raise YOutOfUnitInterval(f"fair sqrt(y) = {root_y:.6g} is negative")
    y = root_y * root_y
    if y > 1.0:
        raise YOutOfUnitInterval(f"fair y = {y:.6g} exceeds 1")
    dist = honest_closed_form(ProtocolParams(x, y, z), losses)
    if abs(dist.p_alice_wins - dist.p_bob_wins) > FAIRNESS_TOL:
        raise NoFairParameter(
            f"fairness residual {dist.p_alice_wins - dist.p_bob_wins:.3e} at x={x}, z={z}"
        )
    return y


def balance_x(y: float, z: float, losses: LossBudget) -> float:
    """Alice's reflectivity ``x`` that equalizes the two cheating probabilities."""
    p_d_alice, _ = alice_cheat_lossy(ProtocolParams(0.0, y, z), losses)
    x = (1.0 - p_d_alice) / (losses.eta_f_a * losses.eta_d_a)
    if not 0.0 <= x <= 1.0:
        raise XOutOfUnitInterval(f"balanced x = {x:.6g} outside [0, 1] at y={y}, z={z}")
    residual = bob_cheat(ProtocolParams(x, y, z), losses) - p_d_alice
    if abs(residual) > BALANCE_TOL:
        raise XOutOfUnitInterval(f"balance residual {residual:.3e}")
    return x


def classical_protocol_exists(p_h_a: float, p_h_b: float, p_d_a: float, p_d_b: float) -> bool:
    """Whether some classical coin flip reaches these honest/cheating probabilities.

    This is the full three-inequality test; quantum advantage means it fails.
    """
    p_ab = 1.0 - p_h_a - p_h_b
    return p_h_a <= p_d_a and p_h_b <= p_d_b and p_ab >= (1.0 - p_d_a) * (1.0 - p_d_b)


@dataclass(frozen=True)
class SolveResult:
    x: float
    y: float
    z: float
    p_h: float
    p_ab: float
    p_d_quantum: float
    p_d_classical: float
    l_one: int
    advantage: bool
    converged: bool
    iterations: int
    # advantage according to the full classical-feasibility system
    advantage_full_system: bool = False

    @property
    def params(self) -> ProtocolParams:
        return ProtocolParams(self.x, self.y, self.z)

    @property
    def classical_tests_agree(self) -> bool:
        return self.advantage == self.advantage_full_system

    def to_dict(self) -> dict:
        return asdict(self)


X_START = 1.0 - 1.0 / math.sqrt(2.0)


def solve_fair_balanced(
    z: float,
    losses: LossBudget,
    x0: float = X_START,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    strict: bool = True,
) -> SolveResult:
    """Fixed point of ``x -> balance_x(fairness_y(x, z), z)``.

    A step whose size grows compared with the previous one is halved.
    With ``strict=False`` an unconverged iterate is returned with
    ``converged=False`` instead of raising :class:`NoConvergence`.
    """
    x = x0
    prev_step = math.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        target = balance_x(fairness_y(x, z, losses), z, losses)
        step = target - x
        if abs(step) > abs(prev_step):
            step /= 2.0
        x_new = x + step
        prev_step = step
        x = x_new
        if abs(step) <= tol:
            converged = True
            break
    if not converged and strict:
        raise NoConvergence(f"no fixed point after {max_iter} iterations (last x={x})")

    y = fairness_y(x, z, losses)
    params = ProtocolParams(x, y, z)
    dist = honest_closed_form(params, losses)
    p_d_a, l_one = alice_cheat_lossy(params, losses)
    p_d_b = bob_cheat(params, losses)
    p_d_q = max(p_d_a, p_d_b)
    p_ab = max(dist.p_abort, 0.0)
    p_d_c = 1.0 - math.sqrt(p_ab)
    return SolveResult(
        x=x,
        y=y,
        z=z,
        p_h=dist.p_alice_wins,
        p_ab=p_ab,
        p_d_quantum=p_d_q,
        p_d_classical=p_d_c,
        l_one=l_one,
        advantage=p_d_q < p_d_c,
        converged=converged,
        iterations=it,
        advantage_full_system=not classical_protocol_exists(
            dist.p_alice_wins, dist.p_bob_wins, p_d_a, p_d_b
        ),
    )


@dataclass(frozen=True)
class SweepRow:
    d_km: float
    result: SolveResult | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.result is not None


def _sweep_row(d: float, z: float, detector_eff: float, link: LinkModel) -> SweepRow:
    losses = link_budget(replace(link, distance_km=d), detector_eff)
    try:
        return SweepRow(d, solve_fair_balanced(z, losses))
    except CoinFlipError as exc:
        return SweepRow(d, None, f"{type(exc).__name__}: {exc}")


def sweep(
    d_values: Sequence[float],
    z: float,
    detector_eff: float,
    link: LinkModel | None = None,
    workers: int = 1,
) -> list[SweepRow]:
    """One solved operating point per distance; failures are kept as error rows."""
    d_values = [float(d) for d in d_values]
    if not d_values:
        raise ValueError("no distances given")
    if any(b < a for a, b in zip(d_values, d_values[1:])):
        raise ValueError("distances must be ascending")
    link = link or LinkModel()
    args = [(d, z, detector_eff, link) for d in d_values]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda a: _sweep_row(*a), args))
    return [_sweep_row(*a) for a in args]


def crossover_distance(rows: Sequence[SweepRow]) -> float | None:
    """First distance after which the advantage is lost (``None`` if never lost)."""
    for prev, row in zip(rows, rows[1:]):
        if prev.ok and prev.result.advantage and not (row.ok and row.result.advantage):
            return row.d_km
    return None


def best_z_for_range(
    z_values: Sequence[float],
    detector_eff: float,
    d_values: Sequence[float],
    link: LinkModel | None = None,
) -> tuple[float, float | None]:
    """Convenience scan (not part of the protocol analysis): pick the ``z``
    whose sweep keeps the quantum advantage to the largest distance."""
    best: tuple[float, float] = (math.nan, -math.inf)
    for z in z_values:
        rows = sweep(d_values, z, detector_eff, link)
        reach = max((r.d_km for r in rows if r.ok and r.result.advantage), default=-math.inf)
        if reach > best[1]:
            best = (float(z), reach)
    return best[0], (None if math.isinf(best[1]) else best[1])


def distance_grid(d_min: float, d_max: float, d_step: float) -> list[float]:
    """Inclusive, rounding-stable grid of distances."""
    n = int(np.floor((d_max - d_min) / d_step + 1e-9))
    return [round(d_min + i * d_step, 12) for i in range(n + 1)]
