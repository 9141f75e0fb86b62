"""Reference computations that share no code path with the package internals."""

from __future__ import annotations

import itertools
import math

import numpy as np

from photonic_coinflip.fock import FockBasis, QuantumState


def permanent(m: np.ndarray) -> complex:
    n = m.shape[0]
    if n == 0:
        return 1.0
    return sum(
        np.prod([m[i, p[i]] for i in range(n)]) for p in itertools.permutations(range(n))
    )


def _mode_list(occ) -> list[int]:
    return [mode for mode, n in enumerate(occ) for _ in range(n)]


def linear_optics_unitary(basis: FockBasis, h: np.ndarray) -> np.ndarray:
    """Fock-space matrix of the mode map ``a_j^dag -> sum_i h[i, j] a_i^dag``.

    Amplitude <out|U|in> = Per(h[out_modes, in_modes]) / sqrt(prod n! prod m!).
    """
    u = np.zeros((basis.dim, basis.dim), dtype=complex)
    for c, occ_in in enumerate(basis.states):
        cols = _mode_list(occ_in)
        norm_in = math.prod(math.factorial(n) for n in occ_in)
        for r, occ_out in enumerate(basis.states):
            if sum(occ_out) != sum(occ_in):
                continue
            rows = _mode_list(occ_out)
            sub = h[np.ix_(rows, cols)] if rows else np.zeros((0, 0))
            norm = math.sqrt(norm_in * math.prod(math.factorial(n) for n in occ_out))
            u[r, c] = permanent(sub) / norm
    return u


def embed_beamsplitter(modes: int, k: int, l: int, r: float) -> np.ndarray:
    h = np.eye(modes)
    h[k, k], h[k, l] = math.sqrt(r), math.sqrt(1 - r)
    h[l, k], h[l, l] = math.sqrt(1 - r), -math.sqrt(r)
    return h


def partial_trace_last(state: QuantumState, reduced: FockBasis) -> np.ndarray:
    """Trace out the last mode of ``state`` onto ``reduced`` (one mode fewer)."""
    rho = np.zeros((reduced.dim, reduced.dim), dtype=complex)
    full = state.basis
    for i, a in enumerate(full.states):
        for j, b in enumerate(full.states):
            if a[-1] == b[-1] and sum(a[:-1]) <= reduced.max_total_photons and sum(b[:-1]) <= reduced.max_total_photons:
                rho[reduced.index(a[:-1]), reduced.index(b[:-1])] += state.matrix[i, j]
    return rho


def embed_with_vacuum(state: QuantumState, extra: int = 1) -> QuantumState:
    """``state ⊗ |0><0|`` on ``extra`` appended modes with the same photon cap."""
    small = state.basis
    big = FockBasis(small.mode_count + extra, small.max_total_photons)
    idx = [big.index(occ + (0,) * extra) for occ in small.states]
    rho = np.zeros((big.dim, big.dim), dtype=complex)
    rho[np.ix_(idx, idx)] = state.matrix
    return QuantumState(big, rho)


def loss_by_dilation(state: QuantumState, mode: int, eta: float) -> np.ndarray:
    """Pure loss as a beam splitter into a fresh vacuum mode, then tracing it out."""
    big_state = embed_with_vacuum(state)
    m = big_state.basis.mode_count
    h = embed_beamsplitter(m, mode, m - 1, eta)
    u = linear_optics_unitary(big_state.basis, h)
    out = QuantumState(big_state.basis, u @ big_state.matrix @ u.conj().T)
    return partial_trace_last(out, state.basis)


def random_density(basis: FockBasis, rng: np.random.Generator, rank: int = 3) -> QuantumState:
    g = rng.normal(size=(basis.dim, rank)) + 1j * rng.normal(size=(basis.dim, rank))
    rho = g @ g.conj().T
    return QuantumState(basis, rho / np.trace(rho).real)


def alice_cheat_by_dilation(y: float, z: float, eta_f: float, eta_d: float, cap: int) -> float:
    """Optimal cheating probability with every loss written as a beam splitter.

    Modes: 0, 1 Alice's inputs (1 is sent first); 2 Bob's c-detector mode;
    3 the delay-line environment.  Detector inefficiency is a no-click weight.
    The winning operator is assembled in the Schrodinger picture column by
    column and maximized with an eigen-solver.
    """
    basis = FockBasis(4, cap)
    u_y = linear_optics_unitary(basis, embed_beamsplitter(4, 1, 2, y))
    u_f = linear_optics_unitary(basis, embed_beamsplitter(4, 1, 3, eta_f))
    u_z = linear_optics_unitary(basis, embed_beamsplitter(4, 0, 1, z))
    u = u_z @ u_f @ u_y
    occ = basis.occupations
    nc = (1 - eta_d) ** occ
    win = (1 - nc[:, 0]) * nc[:, 1] * nc[:, 2]
    alice = FockBasis(2, cap)
    idx = [basis.index((a, b, 0, 0)) for a, b in alice.states]
    cols = u[:, idx]
    m = cols.conj().T @ (win[:, None] * cols)
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[-1])
