import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonic_coinflip import adversary
from photonic_coinflip.errors import DegenerateEfficiency, TruncationTooSmall, WrongModeCount
from photonic_coinflip.fock import DetectorKind, FockBasis, QuantumState
from photonic_coinflip.protocol import LOSSLESS, LossBudget, ProtocolParams, honest_closed_form

from oracles import alice_cheat_by_dilation

X_BAL = 1 - 1 / math.sqrt(2)


def scan_oracle(y, z, eta_f, eta_d, l_max=400):
    """Direct maximization of r^l - s^l over l = 1..l_max."""
    r = 1 - eta_d * (1 - y * eta_f) * (1 - z)
    s = 1 - eta_d
    ls = np.arange(1, l_max + 1)
    vals = r**ls - s**ls
    return float(vals.max()), int(ls[np.argmax(vals)])


# Bob ----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "x,losses,expected",
    [
        (X_BAL, LOSSLESS, 1 / math.sqrt(2)),
        (0.0, LossBudget(0.3, 0.4, 0.5, 0.6, 0.7), 1.0),
        (0.3, LossBudget(eta_f_a=0.9, eta_d_a=0.9), 0.757),
    ],
)
def test_bob_cheat(x, losses, expected):
    assert math.isclose(adversary.bob_cheat(ProtocolParams(x, 0.2, 0.2), losses), expected, rel_tol=1e-14)


def test_bob_caught_probability():
    params, losses = ProtocolParams(0.3, 0.2, 0.2), LossBudget(eta_f_a=0.9, eta_d_a=0.8)
    assert math.isclose(adversary.bob_caught_probability(params, losses), 0.3 * 0.9 * 0.8)
    assert math.isclose(
        adversary.bob_caught_probability(params, losses) + adversary.bob_cheat(params, losses), 1.0
    )


# Alice, lossless ----------------------------------------------------------------


def test_alice_balanced_point():
    assert math.isclose(adversary.alice_cheat_lossless(ProtocolParams.fair_family(X_BAL)), 1 / math.sqrt(2), rel_tol=1e-14)


def test_alice_cannot_force_click_without_reflection():
    assert adversary.alice_cheat_lossless(ProtocolParams(0.3, 0.0, 0.0)) == 0.0


def test_quarter_fair_family():
    params = ProtocolParams.fair_family(0.25)
    p_a, p_b = adversary.alice_cheat_lossless(params), adversary.bob_cheat(params)
    assert math.isclose(p_a, 2 / 3) and math.isclose(p_b, 3 / 4) and math.isclose(p_a * p_b, 0.5)


@given(x=st.floats(0.0, 0.5))
def test_fair_family_cheat_and_product_law(x):
    params = ProtocolParams.fair_family(x)
    p_a = adversary.alice_cheat_lossless(params)
    assert math.isclose(p_a, 1 / (2 * (1 - x)), rel_tol=1e-12)
    assert abs(p_a * adversary.bob_cheat(params) - 0.5) <= 1e-12
    assert p_a >= honest_closed_form(params).p_alice_wins - 1e-12


# optimal states -----------------------------------------------------------------


@pytest.mark.parametrize("x", [0.1, 0.25, X_BAL, 0.4])
def test_fair_family_optimal_state(x):
    state = adversary.alice_optimal_state(ProtocolParams.fair_family(x))
    ref = QuantumState.from_amplitudes(state.basis, {(1, 0): 2 * math.sqrt(x * (1 - x)), (0, 1): 1 - 2 * x})
    assert np.allclose(state.matrix, ref.matrix, atol=1e-14)


def test_half_family_sends_only_the_first_mode():
    state = adversary.alice_optimal_state(ProtocolParams.fair_family(0.5))
    assert math.isclose(state.amplitude_weight((1, 0)), 1.0, rel_tol=1e-14)


def test_lossy_single_photon_state_substitutes_y():
    y, z, ef = 0.4, 0.5, 0.8
    lossy = adversary.alice_optimal_state(ProtocolParams(0.0, y, z), LossBudget(eta_f_b=ef))
    plain = adversary.alice_optimal_state(ProtocolParams(0.0, y * ef, z))
    assert np.allclose(lossy.matrix, plain.matrix, atol=1e-14)


def test_optimal_state_basis_errors():
    params, losses = ProtocolParams(0.0, 0.8, 0.3), LossBudget(eta_d_b=0.6)
    with pytest.raises(TruncationTooSmall):
        adversary.alice_optimal_state(params, losses, FockBasis(2, 1))
    with pytest.raises(WrongModeCount):
        adversary.alice_optimal_state(params, basis=FockBasis(3, 2))


# Alice, lossy closed form -------------------------------------------------------


@given(y=st.floats(0, 1), z=st.floats(0, 0.999), ef=st.floats(0, 1))
def test_perfect_detector_needs_one_photon(y, z, ef):
    p, l_one = adversary.alice_cheat_lossy(ProtocolParams(0.0, y, z), LossBudget(eta_f_b=ef))
    assert l_one == 1
    assert math.isclose(p, 1 - (1 - y * ef) * (1 - z), rel_tol=1e-14, abs_tol=1e-15)


def test_lossless_limit():
    params = ProtocolParams(0.0, 0.4, 0.3)
    near, _ = adversary.alice_cheat_lossy(params, LossBudget(eta_d_b=1 - 1e-9))
    assert math.isclose(near, adversary.alice_cheat_lossless(params), abs_tol=1e-8)


def test_photon_number_matches_scan():
    p, l_one = adversary.alice_cheat_lossy(ProtocolParams(0.0, 1 / 3, 0.5), LossBudget(eta_f_b=0.98, eta_d_b=0.95))
    ref_p, ref_l = scan_oracle(1 / 3, 0.5, 0.98, 0.95)
    assert l_one == ref_l
    assert abs(p - ref_p) <= 1e-15


@given(y=st.floats(0, 1), z=st.floats(0, 0.99), ef=st.floats(0, 1), ed=st.floats(0.01, 1))
def test_closed_form_agrees_with_scan_and_bound(y, z, ef, ed):
    params, losses = ProtocolParams(0.0, y, z), LossBudget(eta_f_b=ef, eta_d_b=ed)
    if 1 - ed * (1 - y * ef) * (1 - z) >= 1 and ed < 1:
        # r = 1: r^l - s^l keeps growing with l
        with pytest.raises(DegenerateEfficiency):
            adversary.alice_cheat_lossy(params, losses)
        return
    p, l_one = adversary.alice_cheat_lossy(params, losses)
    ref_p, _ = scan_oracle(y, z, ef, ed)
    assert l_one >= 1
    assert abs(p - ref_p) <= 1e-15
    assert p <= adversary.alice_cheat_lossless(params) + 1e-15


def test_zero_efficiency_rejected():
    with pytest.raises(DegenerateEfficiency):
        adversary.optimal_photon_number(0.3, 0.3, 1.0, 0.0)


def test_unbounded_objective_rejected():
    with pytest.raises(DegenerateEfficiency):
        adversary.optimal_photon_number(0.3, 1.0, 1.0, 0.5)


# brute-force eigen oracle -------------------------------------------------------


@given(y=st.floats(0, 1), z=st.floats(0.01, 1))
@settings(max_examples=25)
def test_oracle_lossless(y, z):
    params = ProtocolParams(0.0, y, z)
    value, state = adversary.alice_cheat_bruteforce(params)
    assert abs(value - adversary.alice_cheat_lossless(params)) <= 1e-9
    # at value 1 every photon number in the optimal mode wins and the top
    # eigenspace is degenerate; below that the single photon is unique
    if y * (1 - z) + z > 0.01 and (1 - y) * (1 - z) > 0.05:
        assert state.fidelity_with_pure(adversary.alice_optimal_state(params, basis=state.basis)) >= 1 - 1e-8


@pytest.mark.parametrize("y,z,ed", [(0.2, 0.4, 0.5), (0.8, 0.3, 0.6), (1 / 3, 0.5, 0.95), (0.6, 0.2, 0.75)])
def test_oracle_matches_closed_form_with_lossless_delay_line(y, z, ed):
    params, losses = ProtocolParams(0.0, y, z), LossBudget(eta_d_b=ed)
    closed, l_one = adversary.alice_cheat_lossy(params, losses)
    value, state = adversary.alice_cheat_bruteforce(params, losses)
    analytic = adversary.alice_optimal_state(params, losses, state.basis)
    assert abs(value - closed) <= 1e-9
    assert state.fidelity_with_pure(analytic) >= 1 - 1e-8


@pytest.mark.parametrize("y,z,ef,ed", [(0.2, 0.4, 0.8, 0.9), (0.5, 0.5, 0.9, 1.0), (0.4, 0.6, 0.8, 0.95)])
def test_oracle_matches_closed_form_when_one_photon_is_optimal(y, z, ef, ed):
    params, losses = ProtocolParams(0.0, y, z), LossBudget(eta_f_b=ef, eta_d_b=ed)
    closed, l_one = adversary.alice_cheat_lossy(params, losses)
    assert l_one == 1
    value, _ = adversary.alice_cheat_bruteforce(params, losses)
    assert abs(value - closed) <= 1e-9


@pytest.mark.parametrize("y,z,ef,ed", [(0.8, 0.3, 0.7, 0.6), (0.6, 0.2, 0.8, 0.5), (0.4, 0.4, 0.9, 0.75)])
def test_oracle_matches_independent_dilation(y, z, ef, ed):
    params, losses = ProtocolParams(0.0, y, z), LossBudget(eta_f_b=ef, eta_d_b=ed)
    _, l_one = adversary.alice_cheat_lossy(params, losses)
    value, _ = adversary.alice_cheat_bruteforce(params, losses)
    assert abs(value - alice_cheat_by_dilation(y, z, ef, ed, l_one + 2)) <= 1e-12


def test_delay_line_loss_closed_form_is_only_a_lower_bound():
    # with a lossy delay line and several photons the photons lost in the
    # delay line leave no trace, which the closed form does not account for
    params, losses = ProtocolParams(0.0, 0.8, 0.3), LossBudget(eta_f_b=0.7, eta_d_b=0.6)
    closed, l_one = adversary.alice_cheat_lossy(params, losses)
    value, _ = adversary.alice_cheat_bruteforce(params, losses)
    analytic = adversary.alice_optimal_state(params, losses, FockBasis(2, l_one + 2))
    achieved = adversary.alice_win_probability(analytic, params, losses)
    assert l_one >= 2
    assert closed < achieved < value
    assert math.isclose(value, 0.6237573947, abs_tol=1e-9)


def test_oracle_clickable_subspace_is_dark_without_reflection():
    value, _ = adversary.alice_cheat_bruteforce(ProtocolParams(0.3, 0.0, 0.0))
    assert abs(value) <= 1e-12


def test_oracle_truncation_checks():
    params, losses = ProtocolParams(0.0, 0.8, 0.3), LossBudget(eta_d_b=0.6)
    _, l_one = adversary.alice_cheat_lossy(params, losses)
    with pytest.raises(TruncationTooSmall):
        adversary.alice_cheat_bruteforce(params, losses, FockBasis(3, l_one + 1))
    with pytest.raises(WrongModeCount):
        adversary.alice_cheat_bruteforce(params, losses, FockBasis(2, l_one + 2))


@pytest.mark.parametrize("y,z", [(0.2, 0.4), (0.5, 0.5), (0.8, 0.6), (0.3, 0.9)])
def test_threshold_and_resolving_detectors_agree(y, z):
    params, basis = ProtocolParams(0.0, y, z), FockBasis(3, 4)
    thr, _ = adversary.alice_cheat_bruteforce(params, basis=basis)
    nr, _ = adversary.alice_cheat_bruteforce(params, basis=basis, detector_kind=DetectorKind.NUMBER_RESOLVING)
    assert abs(thr - nr) <= 1e-9


@given(seed=st.integers(0, 2**32 - 1), w=st.floats(0.0, 1.0))
@settings(max_examples=30)
def test_vacuum_component_never_helps(seed, w):
    rng = np.random.default_rng(seed)
    params = ProtocolParams(0.0, float(rng.uniform()), float(rng.uniform()))
    losses = LossBudget(eta_f_b=float(rng.uniform(0.5, 1)), eta_d_b=float(rng.uniform(0.5, 1)))
    basis = FockBasis(2, 3)
    ket = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    ket[0] = 0
    ket /= np.linalg.norm(ket)
    with_vac = math.sqrt(1 - w) * ket
    with_vac[0] = math.sqrt(w)
    base = adversary.alice_win_probability(QuantumState.from_ket(basis, ket), params, losses)
    mixed = adversary.alice_win_probability(QuantumState.from_ket(basis, with_vac), params, losses)
    assert mixed <= base + 1e-12


def test_cheat_report():
    rep = adversary.cheat_report(ProtocolParams.fair_family(X_BAL))
    assert rep.l_one == 1
    assert math.isclose(rep.bias, 1 / math.sqrt(2) - 0.5, abs_tol=1e-12)


# classical lose limit -----------------------------------------------------------


def test_classical_lose_limit_examples():
    assert math.isclose(adversary.classical_lose_limit(0.3, 1.0, 1), 0.7)
    assert all(adversary.classical_lose_limit(0.0, 1.0, n) == 1.0 for n in range(1, 6))
    y, eta = 1 / 3, 0.95
    assert math.isclose(adversary.classical_lose_limit(y, eta, 10), 1 - (1 / 3 + 0.05 * 2 / 3) ** 10)


@pytest.mark.parametrize("n", range(1, 7))
def test_classical_lose_limit_simulated(n):
    y, eta = 1 / 3, 0.95
    assert abs(adversary.classical_lose_limit(y, eta, n) - adversary.classical_lose_limit_simulated(y, eta, n)) <= 1e-10


@given(y=st.floats(0.0, 0.95), eta=st.floats(0.05, 1.0), n=st.integers(1, 15))
def test_classical_lose_limit_increasing(y, eta, n):
    a, b = (adversary.classical_lose_limit(y, eta, k) for k in (n, n + 1))
    assert b >= a


# SCF ----------------------------------------------------------------------------


def test_scf_bias_examples():
    assert adversary.scf_bias(0.5, 0.5) == 0.5
    assert math.isclose(adversary.scf_bias(2 - math.sqrt(2), 0.0), 1 / math.sqrt(2) - 0.5, rel_tol=1e-12)


@given(p=st.floats(0.0, 1.0))
def test_scf_bias_of_balanced_weak_flip(p):
    b = adversary.scf_bias(p, 0.0)
    assert b == max(0.5 - p / 2, 1 / (2 - p) - 0.5)
    assert b >= 1 / math.sqrt(2) - 0.5 - 1e-15


def test_scf_solution():
    res = adversary.scf_solve()
    assert abs(res.x - 0.38) <= 0.01 and abs(res.y - 0.31) <= 0.01 and abs(res.z - 0.66) <= 0.01
    assert abs(res.bias - 0.31) <= 0.005
    assert max(abs(r) for r in adversary.scf_residuals(res.x, res.y, res.z)) < 1e-10
    assert abs(adversary.scf_bias(res.p, res.epsilon) - res.bias) <= 1e-12
    assert res.epsilon >= 0
