"""Runtime invariant suite behind ``photonic-coinflip verify``.

Each check returns ``(passed, detail)``; :func:`run_all` collects them.
The checks are deterministic (fixed RNG seed) so two runs print the same
report.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import adversary, fock, protocol, solver
from .errors import CoinFlipError
from .fock import CLICK, NO_CLICK, BeamSplitterSpec, DetectorKind, DetectorModel, FockBasis, QuantumState
from .protocol import LossBudget, ProtocolParams

SEED = 20201
ORACLE_GRID_Y = (0.2, 0.4, 0.6, 0.8)
ORACLE_GRID_Z = (0.2, 0.4, 0.6, 0.8)
ORACLE_GRID_ETA_F = (0.8, 0.9, 1.0)
ORACLE_GRID_ETA_D = (0.5, 0.75, 1.0)


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    passed: bool
    detail: str


def random_state(basis: FockBasis, rng: np.random.Generator, rank: int = 3) -> QuantumState:
    g = rng.normal(size=(basis.dim, rank)) + 1j * rng.normal(size=(basis.dim, rank))
    rho = g @ g.conj().T
    return QuantumState(basis, rho / np.trace(rho).real)


def _max_abs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)))


# fock -----------------------------------------------------------------------


def check_photon_number_conservation(samples: int = 20):
    rng = np.random.default_rng(SEED)
    basis = FockBasis(3, 4)
    worst = 0.0
    for _ in range(samples):
        st = random_state(basis, rng)
        before = st.photon_number_distribution()
        for _ in range(4):
            k, l = rng.choice(3, size=2, replace=False)
            st = fock.apply_beamsplitter(st, BeamSplitterSpec(float(rng.uniform()), (int(k), int(l))))
            st = fock.apply_phase(st, int(rng.integers(3)), float(rng.uniform(0, 2 * math.pi)))
        worst = max(worst, _max_abs(before, st.photon_number_distribution()))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def check_loss_commutation(samples: int = 100):
    rng = np.random.default_rng(SEED + 1)
    basis = FockBasis(2, 4)
    worst = 0.0
    for _ in range(samples):
        st = random_state(basis, rng)
        eta, t = float(rng.uniform()), float(rng.uniform())
        bs = BeamSplitterSpec(t, (0, 1))
        a = fock.apply_beamsplitter(fock.apply_loss(fock.apply_loss(st, 0, eta), 1, eta), bs)
        b = fock.apply_loss(fock.apply_loss(fock.apply_beamsplitter(st, bs), 0, eta), 1, eta)
        worst = max(worst, _max_abs(a.matrix, b.matrix))
    return worst <= 1e-10, f"max entry deviation {worst:.2e}"


def trace_reduction_sides(tau: QuantumState, y: float, z: float) -> tuple[float, float]:
    """Both sides of the three-mode trace identity for a two-mode ``tau``."""
    n = tau.basis.max_total_photons
    basis = FockBasis(3, n)
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    idx = [basis.index((a, b, 0)) for a, b in tau.basis.states]
    rho[np.ix_(idx, idx)] = tau.matrix
    st = QuantumState(basis, rho)

    left = fock.apply_beamsplitter(st, BeamSplitterSpec(y, (1, 2)))
    left = fock.apply_beamsplitter(left, BeamSplitterSpec(z, (0, 1)))
    lhs = fock.outcome_probability(left, [None, NO_CLICK, NO_CLICK])

    b = 1.0 - (1.0 - y) * (1.0 - z)
    a = y * (1.0 - z) / b
    right = fock.apply_phase(st, 1, math.pi)
    right = fock.apply_beamsplitter(right, BeamSplitterSpec(a, (0, 1)))
    right = fock.apply_beamsplitter(right, BeamSplitterSpec(b, (1, 2)))
    rhs = fock.outcome_probability(right, [NO_CLICK, None, NO_CLICK])
    return lhs, rhs


def check_trace_reduction(samples: int = 100):
    rng = np.random.default_rng(SEED + 2)
    basis = FockBasis(2, 3)
    worst = 0.0
    for _ in range(samples):
        y, z = float(rng.uniform()), float(rng.uniform(0.01, 1.0))
        lhs, rhs = trace_reduction_sides(random_state(basis, rng), y, z)
        worst = max(worst, abs(lhs - rhs))
    return worst <= 1e-10, f"max |lhs - rhs| {worst:.2e}"


def check_povm_completeness():
    basis = FockBasis(3, 5)
    worst = 0.0
    for eta, pdc in itertools.product((0.0, 0.3, 0.9, 1.0), (0.0, 1e-8, 0.1)):
        det = DetectorModel(efficiency=eta, dark_count=pdc)
        for mode in range(3):
            pattern_nc = [None] * 3
            pattern_c = [None] * 3
            pattern_nc[mode], pattern_c[mode] = NO_CLICK, CLICK
            total = fock.povm_diagonal(basis, pattern_nc, det) + fock.povm_diagonal(basis, pattern_c, det)
            worst = max(worst, float(np.max(np.abs(total - 1.0))))
    return worst <= 1e-12, f"max |sum - 1| {worst:.2e}"


def check_kraus_completeness():
    basis = FockBasis(3, 5)
    worst = 0.0
    for eta in (0.0, 0.2, 0.77, 1.0):
        for mode in range(3):
            s = sum(k.T @ k for k in fock.loss_kraus(basis, mode, eta))
            worst = max(worst, _max_abs(s, np.eye(basis.dim)))
    return worst <= 1e-12, f"max |sum K^T K - 1| {worst:.2e}"


# protocol -------------------------------------------------------------------


def check_fairness_identity():
    worst = 0.0
    for x in np.linspace(0.0, 0.49, 50):
        d = protocol.honest_closed_form(ProtocolParams.fair_family(float(x)))
        worst = max(worst, abs(d.p_alice_wins - 0.5), abs(d.p_bob_wins - 0.5))
    return worst <= 1e-12, f"max |P_h - 1/2| {worst:.2e}"


PARAM_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)
LOSS_GRID = (0.5, 0.8, 1.0)


def loss_grid():
    for et, fa, fb, da, db in itertools.product(LOSS_GRID, repeat=5):
        yield LossBudget(et, fa, fb, da, db)


def check_simulator_agreement(full: bool = True):
    worst = 0.0
    losses = list(loss_grid()) if full else [LossBudget(), LossBudget(0.8, 0.5, 0.8, 1.0, 0.5)]
    for x, y, z in itertools.product(PARAM_GRID, repeat=3):
        params = ProtocolParams(x, y, z)
        for lb in losses:
            a = protocol.honest_closed_form(params, lb)
            b = protocol.honest_simulated(params, lb)
            worst = max(worst, a.max_deviation(b))
    return worst <= 1e-10, f"max deviation {worst:.2e} over {125 * len(losses)} points"


def check_alice_detector_independence():
    worst = 0.0
    for x, y, z in itertools.product(PARAM_GRID, repeat=3):
        params = ProtocolParams(x, y, z)
        ref = protocol.honest_simulated(params, LossBudget(0.9, 0.8, 0.7, 1.0, 0.9))
        for eta_a in (0.1, 0.5):
            alt = protocol.honest_simulated(params, LossBudget(0.9, 0.8, 0.7, eta_a, 0.9))
            worst = max(worst, ref.max_deviation(alt))
    return worst <= 1e-12, f"max change {worst:.2e}"


def check_abort_monotonicity():
    violations = 0
    names = ("eta_t", "eta_f_a", "eta_f_b", "eta_d_a", "eta_d_b")
    for x, y, z in itertools.product(PARAM_GRID, repeat=3):
        params = ProtocolParams(x, y, z)
        for name in names:
            aborts = []
            for v in LOSS_GRID:
                kw = {n: 0.9 for n in names}
                kw[name] = v
                aborts.append(protocol.honest_closed_form(params, LossBudget(**kw)).p_abort)
            violations += sum(b > a + 1e-12 for a, b in zip(aborts, aborts[1:]))
    return violations == 0, f"{violations} increases of P_ab with efficiency"


# adversary ------------------------------------------------------------------


def check_product_law():
    worst = 0.0
    for x in np.arange(0.05, 0.451, 0.05):
        params = ProtocolParams.fair_family(float(x))
        prod = adversary.alice_cheat_lossless(params) * adversary.bob_cheat(params)
        worst = max(worst, abs(prod - 0.5))
    return worst <= 1e-12, f"max |P_d^A P_d^B - 1/2| {worst:.2e}"


def check_loss_never_helps():
    violations = 0
    for y, z, ef, ed in itertools.product(ORACLE_GRID_Y, ORACLE_GRID_Z, ORACLE_GRID_ETA_F, ORACLE_GRID_ETA_D):
        params = ProtocolParams(0.0, y, z)
        p_lossy, _ = adversary.alice_cheat_lossy(params, LossBudget(eta_f_b=ef, eta_d_b=ed))
        violations += p_lossy > adversary.alice_cheat_lossless(params) + 1e-15
    return violations == 0, f"{violations} grid points above the lossless value"


def oracle_grid_deviations():
    """Per-point (params, losses, closed form, oracle, fidelity) on the oracle grid."""
    out = []
    for y, z, ef, ed in itertools.product(ORACLE_GRID_Y, ORACLE_GRID_Z, ORACLE_GRID_ETA_F, ORACLE_GRID_ETA_D):
        params = ProtocolParams(0.0, y, z)
        losses = LossBudget(eta_f_b=ef, eta_d_b=ed)
        closed, l_one = adversary.alice_cheat_lossy(params, losses)
        basis = FockBasis(3, l_one + 2)
        value, state = adversary.alice_cheat_bruteforce(params, losses, basis)
        analytic = adversary.alice_optimal_state(params, losses, FockBasis(2, l_one + 2))
        out.append((params, losses, closed, value, state.fidelity_with_pure(analytic)))
    return out


def check_oracle_equivalence():
    rows = oracle_grid_deviations()
    bad = [r for r in rows if abs(r[2] - r[3]) > 1e-9 or r[4] < 1 - 1e-8]
    worst = max(abs(r[2] - r[3]) for r in rows)
    return not bad, f"{len(bad)}/{len(rows)} points off; max |closed - oracle| {worst:.2e}"


def check_oracle_equivalence_perfect_delay():
    rows = [r for r in oracle_grid_deviations() if r[1].eta_f_b == 1.0]
    bad = [r for r in rows if abs(r[2] - r[3]) > 1e-9 or r[4] < 1 - 1e-8]
    return not bad, f"{len(bad)}/{len(rows)} points off (eta_f^B = 1)"


def check_detector_kind_equivalence():
    worst = 0.0
    for y, z in itertools.product(ORACLE_GRID_Y, ORACLE_GRID_Z):
        params = ProtocolParams(0.0, y, z)
        basis = FockBasis(3, 4)
        thr, _ = adversary.alice_cheat_bruteforce(params, basis=basis)
        nr, _ = adversary.alice_cheat_bruteforce(params, basis=basis, detector_kind=DetectorKind.NUMBER_RESOLVING)
        worst = max(worst, abs(thr - nr))
    return worst <= 1e-9, f"max |threshold - resolving| {worst:.2e}"


def check_vacuum_removal(samples: int = 50):
    rng = np.random.default_rng(SEED + 3)
    violations = 0
    basis = FockBasis(2, 3)
    for _ in range(samples):
        params = ProtocolParams(0.0, float(rng.uniform()), float(rng.uniform()))
        losses = LossBudget(eta_f_b=float(rng.uniform(0.5, 1)), eta_d_b=float(rng.uniform(0.5, 1)))
        ket = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
        ket[0] = 0.0
        ket /= np.linalg.norm(ket)
        base = adversary.alice_win_probability(QuantumState.from_ket(basis, ket), params, losses)
        w = float(rng.uniform(0.01, 0.99))
        mixed = math.sqrt(1 - w) * ket
        mixed[0] = math.sqrt(w) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        with_vac = adversary.alice_win_probability(QuantumState.from_ket(basis, mixed), params, losses)
        violations += with_vac > base + 1e-12
    return violations == 0, f"{violations} samples improved by vacuum"


def check_scf():
    res = adversary.scf_solve()
    residual = max(abs(r) for r in adversary.scf_residuals(res.x, res.y, res.z))
    ok = (
        abs(res.x - 0.38) <= 0.01 and abs(res.y - 0.31) <= 0.01 and abs(res.z - 0.66) <= 0.01
        and abs(res.bias - 0.31) <= 0.005 and residual < 1e-10
    )
    return ok, f"(x,y,z)=({res.x:.4f},{res.y:.4f},{res.z:.4f}) bias {res.bias:.4f} residual {residual:.1e}"


def check_scf_bias_perfect_wcf():
    ps = np.linspace(0.0, 1.0, 1001)
    bias = np.array([adversary.scf_bias(float(p), 0.0) for p in ps])
    formula = np.maximum(0.5 - ps / 2, 1 / (2 - ps) - 0.5)
    p_min = ps[int(np.argmin(bias))]
    best = 1 / math.sqrt(2) - 0.5
    ok = (
        float(np.max(np.abs(bias - formula))) <= 1e-15
        and bool(np.all(bias >= best - 1e-15))
        and abs(p_min - (2 - math.sqrt(2))) <= 1e-3
        and abs(adversary.scf_bias(2 - math.sqrt(2), 0.0) - best) <= 1e-12
    )
    return ok, f"min bias {bias.min():.6f} at p = {p_min:.3f}"


def check_classical_lose_limit():
    y, eta = 1.0 / 3.0, 0.95
    vals = [adversary.classical_lose_limit(y, eta, n) for n in range(1, 21)]
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    worst = max(
        abs(adversary.classical_lose_limit(y, eta, n) - adversary.classical_lose_limit_simulated(y, eta, n))
        for n in range(1, 7)
    )
    ok = increasing and vals[-1] > 1 - 1e-6 and worst <= 1e-10
    return ok, f"p*1(20) = {vals[-1]:.10f}, max |closed - simulated| {worst:.1e}"


# solver ---------------------------------------------------------------------


def _solved_points():
    out = []
    for eta, z in ((0.95, 0.57), (0.90, 0.63)):
        rows = solver.sweep(solver.distance_grid(0.0, 2.0, 0.1), z, eta)
        out.append((eta, z, rows))
    return out


def check_solver_residuals():
    worst = 0.0
    count = 0
    for eta, z, rows in _solved_points():
        for row in rows:
            if not row.ok:
                continue
            r = row.result
            losses = solver.link_budget(solver.LinkModel(distance_km=row.d_km), eta)
            dist = protocol.honest_closed_form(r.params, losses)
            p_a, _ = adversary.alice_cheat_lossy(r.params, losses)
            p_b = adversary.bob_cheat(r.params, losses)
            worst = max(worst, abs(dist.p_alice_wins - dist.p_bob_wins), abs(p_a - p_b))
            count += 1
    return worst <= 1e-10, f"max residual {worst:.2e} over {count} points"


def check_classical_tests_agree():
    bad = 0
    worst = 0.0
    for _, _, rows in _solved_points():
        for row in rows:
            if row.ok:
                r = row.result
                bad += not r.classical_tests_agree
                worst = max(worst, abs(r.p_d_classical - (1 - math.sqrt(r.p_ab))))
    return bad == 0 and worst <= 1e-12, f"{bad} disagreements, max |P_d^C - (1-sqrt P_ab)| {worst:.1e}"


def check_y_monotone():
    bad = 0
    for _, _, rows in _solved_points():
        ys = [row.result.y for row in rows if row.ok]
        bad += sum(b > a for a, b in zip(ys, ys[1:]))
    return bad == 0, f"{bad} increases of y with distance"


def check_classical_bound_range():
    ok = True
    for _, _, rows in _solved_points():
        for row in rows:
            if row.ok:
                r = row.result
                ok &= 0.0 <= r.p_d_classical <= 1.0
                ok &= (r.p_d_classical == 1.0) == (r.p_ab == 0.0)
    lossless = solver.solve_fair_balanced(2 * (1 - 1 / math.sqrt(2)), LossBudget())
    ok &= lossless.p_ab == 0.0 and lossless.p_d_classical == 1.0
    return bool(ok), "P_d^C in [0,1], equal to 1 exactly when P_ab = 0"


CHECKS: list[tuple[str, str, Callable[[], tuple[bool, str]]]] = [
    ("fock", "photon number conservation", check_photon_number_conservation),
    ("fock", "loss commutes with beam splitter", check_loss_commutation),
    ("fock", "three-mode trace reduction", check_trace_reduction),
    ("fock", "POVM completeness", check_povm_completeness),
    ("fock", "loss channel trace preservation", check_kraus_completeness),
    ("protocol", "fair family is fair", check_fairness_identity),
    ("protocol", "simulator matches closed form", check_simulator_agreement),
    ("protocol", "independent of Alice's detector", check_alice_detector_independence),
    ("protocol", "abort non-increasing in efficiencies", check_abort_monotonicity),
    ("adversary", "product law", check_product_law),
    ("adversary", "loss never helps Alice (closed form)", check_loss_never_helps),
    ("adversary", "oracle equivalence, full grid", check_oracle_equivalence),
    ("adversary", "oracle equivalence, lossless delay line", check_oracle_equivalence_perfect_delay),
    ("adversary", "threshold vs resolving detectors", check_detector_kind_equivalence),
    ("adversary", "vacuum component never helps", check_vacuum_removal),
    ("adversary", "SCF point and bias", check_scf),
    ("adversary", "SCF bias of an exactly balanced WCF", check_scf_bias_perfect_wcf),
    ("adversary", "classical lose limit", check_classical_lose_limit),
    ("solver", "fair and balanced residuals", check_solver_residuals),
    ("solver", "reduced vs full classical test", check_classical_tests_agree),
    ("solver", "y non-increasing in distance", check_y_monotone),
    ("solver", "classical bound range", check_classical_bound_range),
]


def run_all() -> list[CheckResult]:
    results = []
    for module, name, fn in CHECKS:
        try:
            passed, detail = fn()
        except CoinFlipError as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(module, name, bool(passed), detail))
    return results
