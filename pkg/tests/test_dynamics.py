import math

import numpy as np
import pytest
import scipy.linalg

from fockphase.dynamics import (
    QubitParams,
    ResonatorParams,
    damped_superposition_multi,
    damped_superposition_single,
    dressed_states,
    effective_frequency,
    lindblad_evolve,
    u_drive,
    u_free,
    u_jc,
    u_kerr,
)
from fockphase.hilbert import QuantumState, fock_state, product_state, trace_distance

Q = QubitParams(omega0=1.0, g=0.05, rabi=0.04)


def test_u_free_identity_at_zero():
    res = ResonatorParams(dim=4)
    assert np.allclose(u_free(0.0, res, [Q]).matrix, np.eye(8))


def test_u_free_single_qubit_phase():
    res = ResonatorParams(omega=1.3, dim=3)
    q = QubitParams(omega0=0.9, g=0.05, rabi=0.04)
    t = 0.37
    u = u_free(t, res, [q])
    g1 = product_state(fock_state(0, 2), fock_state(1, 3))
    out = u.matrix @ g1.data
    expected = np.exp(-1j * (res.omega - 0.5 * q.omega0) * t) * g1.data
    assert np.allclose(out, expected)


@pytest.mark.parametrize("t", [0.13, 1.7, 9.2])
def test_u_free_unitary(t):
    res = ResonatorParams(omega=1.1, dim=5)
    u = u_free(t, res, [Q, Q]).matrix
    assert np.max(np.abs(u.conj().T @ u - np.eye(20))) < 1e-12


def test_u_drive_half_pi():
    t = math.pi / (2 * Q.rabi)
    out = u_drive(Q, t).matrix @ np.array([1, 0], dtype=complex)
    assert np.allclose(out, np.array([1, 1j]) / np.sqrt(2))


def test_u_drive_full_rotation_is_minus_identity():
    t = 2 * math.pi / Q.rabi
    assert np.allclose(u_drive(Q, t).matrix, -np.eye(2), atol=1e-12)


def test_u_drive_zero_is_identity():
    assert np.allclose(u_drive(Q, 0.0).matrix, np.eye(2))


def test_u_jc_photon_emission():
    # full swap moves the excitation into the resonator with a -i factor
    t = math.pi / (2 * Q.g)
    dim = 3
    e0 = product_state(fock_state(1, 2), fock_state(0, dim))
    g1 = product_state(fock_state(0, 2), fock_state(1, dim))
    out = u_jc(Q, t, dim).matrix @ e0.data
    assert np.allclose(out, -1j * g1.data, atol=1e-12)


def test_u_jc_vacuum_ground_fixed():
    t = math.pi / (2 * Q.g)
    g0 = product_state(fock_state(0, 2), fock_state(0, 3))
    out = u_jc(Q, t, 3).matrix @ g0.data
    assert np.allclose(out, g0.data)


def _exchange_hamiltonian(g: float, dim: int) -> np.ndarray:
    a = np.zeros((dim, dim))
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    sp = np.array([[0, 0], [1, 0]])
    return g * (np.kron(sp, a) + np.kron(sp.T, a.T))


def test_u_jc_against_matrix_exponential():
    # dense-exponential oracle for the n=3 swap
    dim = 6
    t = math.pi / (2 * Q.g * math.sqrt(3))
    u_exact = scipy.linalg.expm(-1j * _exchange_hamiltonian(Q.g, dim) * t)
    assert np.max(np.abs(u_exact - u_jc(Q, t, dim).matrix)) < 1e-9
    g3 = product_state(fock_state(0, 2), fock_state(3, dim))
    e2 = product_state(fock_state(1, 2), fock_state(2, dim))
    out = u_jc(Q, t, dim).matrix @ g3.data
    assert np.allclose(out, -1j * e2.data, atol=1e-12)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_u_jc_random_times_match_expm(seed):
    rng = np.random.default_rng(seed)
    g = rng.uniform(0.01, 0.2)
    t = rng.uniform(0.0, 50.0)
    dim = int(rng.integers(2, 10))
    q = QubitParams(omega0=1.0, g=g, rabi=0.01)
    u_exact = scipy.linalg.expm(-1j * _exchange_hamiltonian(g, dim) * t)
    assert np.max(np.abs(u_exact - u_jc(q, t, dim).matrix)) < 1e-9


def test_u_kerr_low_levels_unaffected():
    res = ResonatorParams(chi=0.7, dim=4)
    u = u_kerr(1.3, res).matrix
    assert u[0, 0] == pytest.approx(1.0)
    assert u[1, 1] == pytest.approx(1.0)


def test_u_kerr_two_photon_phase():
    res = ResonatorParams(chi=0.7, dim=4)
    t = math.pi / (2 * res.chi)
    u = u_kerr(t, res).matrix
    assert u[2, 2] == pytest.approx(np.exp(-1j * math.pi))


def test_kerr_effective_frequency_phase():
    # total phase of |N> relative to |0> after tau equals omega_eff * N * tau
    res = ResonatorParams(omega=1.0, chi=0.4, dim=6)
    n, tau = 4, 2.13
    u = u_kerr(tau, res).matrix @ u_free(tau, res).matrix
    phase = -np.angle(u[n, n] / u[0, 0])
    w_eff = effective_frequency(res, n)
    assert phase % (2 * math.pi) == pytest.approx((w_eff * n * tau) % (2 * math.pi), abs=1e-10)


def test_free_and_kerr_commute():
    res = ResonatorParams(omega=1.0, chi=0.3, dim=5)
    a = u_free(0.7, res).matrix @ u_kerr(0.7, res).matrix
    b = u_kerr(0.7, res).matrix @ u_free(0.7, res).matrix
    assert np.allclose(a, b)


def test_rabi_oscillation():
    # excited-state population under the resonant drive follows sin^2(Omega t / 2)
    for t in np.linspace(0, 2 * math.pi / Q.rabi, 17):
        out = u_drive(Q, t).matrix @ np.array([1, 0], dtype=complex)
        assert abs(out[1]) ** 2 == pytest.approx(math.sin(0.5 * Q.rabi * t) ** 2, abs=1e-12)


# --------------------------------------------------------------------------
# dressed states
# --------------------------------------------------------------------------

def test_dressed_resonant_mixing():
    pair = dressed_states(Q, 3, omega=1.0)
    s, c = pair.mixing
    assert s == pytest.approx(-1 / math.sqrt(2), abs=1e-12)
    assert c == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert pair.delta == pytest.approx(2 * Q.g * math.sqrt(3), abs=1e-12)


def test_dressed_far_detuned_bare_limit():
    q = QubitParams(omega0=1.0 + 100 * Q.g, g=Q.g, rabi=0.01)
    pair = dressed_states(q, 1, omega=1.0)
    # |-> is mostly |g,1>: its |e,0> overlap is the small mixing amplitude
    overlap_e0 = abs(pair.vector_minus()[1])
    assert overlap_e0 < 0.01


@pytest.mark.parametrize("detuning_ratio", [-20.0, -2.0, 0.0, 0.5, 5.0, 100.0])
@pytest.mark.parametrize("n", [1, 2, 5])
def test_dressed_against_dense_diagonalization(detuning_ratio, n):
    omega = 1.0
    q = QubitParams(omega0=omega + detuning_ratio * Q.g, g=Q.g, rabi=0.01)
    pair = dressed_states(q, n, omega)
    # block of the lab-frame Hamiltonian in the ordered basis (|g,n>, |e,n-1>)
    block = np.array(
        [
            [omega * n - 0.5 * q.omega0, q.g * math.sqrt(n)],
            [q.g * math.sqrt(n), omega * (n - 1) + 0.5 * q.omega0],
        ]
    )
    evals, evecs = np.linalg.eigh(block)
    assert pair.eigvals[1] == pytest.approx(evals[0], abs=1e-10)
    assert pair.eigvals[0] == pytest.approx(evals[1], abs=1e-10)
    assert pair.eigvals[0] - pair.eigvals[1] == pytest.approx(pair.delta, abs=1e-12)
    # eigenvectors agree up to sign
    for vec, col in ((pair.vector_plus(), evecs[:, 1]), (pair.vector_minus(), evecs[:, 0])):
        assert min(np.linalg.norm(vec - col), np.linalg.norm(vec + col)) < 1e-10
    s, c = pair.mixing
    assert s * s + c * c == pytest.approx(1.0, abs=1e-12)


def test_dressed_requires_excitation():
    with pytest.raises(ValueError):
        dressed_states(Q, 0, omega=1.0)


# --------------------------------------------------------------------------
# dissipation
# --------------------------------------------------------------------------

def test_lindblad_single_photon_decay():
    res = ResonatorParams(gamma=0.8, dim=3)
    rho = lindblad_evolve(fock_state(1, 3).to_density(), 1.0, res)
    assert rho.data[1, 1].real == pytest.approx(math.exp(-2 * 0.8), abs=1e-9)
    assert rho.data.trace().real == pytest.approx(1.0, abs=1e-9)


def test_lindblad_coherence_decay():
    res = ResonatorParams(gamma=0.5, dim=3)
    v = np.zeros(3, dtype=complex)
    v[0] = v[1] = 1 / math.sqrt(2)
    tau = 1.2
    rho = lindblad_evolve(QuantumState.ket(v, (3,)), tau, res)
    assert abs(rho.data[0, 1]) == pytest.approx(0.5 * math.exp(-res.gamma * tau), abs=1e-9)


def test_lindblad_multi_photon_coherence():
    res = ResonatorParams(gamma=0.4, dim=5)
    n, tau = 3, 0.9
    v = np.zeros(5, dtype=complex)
    v[0] = v[n] = 1 / math.sqrt(2)
    rho = lindblad_evolve(QuantumState.ket(v, (5,)), tau, res)
    assert abs(rho.data[0, n]) == pytest.approx(0.5 * math.exp(-res.gamma * n * tau), abs=1e-8)


def test_lindblad_cptp_properties():
    res = ResonatorParams(gamma=1.0, dim=5)
    v = np.zeros(5, dtype=complex)
    v[0] = v[3] = 1 / math.sqrt(2)
    rho = lindblad_evolve(QuantumState.ket(v, (5,)), 5.0, res)
    m = rho.data
    assert abs(m.trace() - 1.0) < 1e-9
    assert np.max(np.abs(m - m.conj().T)) < 1e-10
    assert np.linalg.eigvalsh(m).min() > -1e-8


def test_damped_single_matches_integrator():
    for gamma_tau in (0.1, 1.0, 3.0):
        res = ResonatorParams(gamma=1.0, dim=3)
        start = damped_superposition_single(0.0, res)
        evolved = lindblad_evolve(start, gamma_tau, res)
        closed = damped_superposition_single(gamma_tau, res)
        assert trace_distance(evolved, closed) < 1e-6


def test_damped_single_limits():
    res = ResonatorParams(gamma=1.0, dim=3)
    pure = damped_superposition_single(0.0, res, phase0=0.4)
    v = np.zeros(3, dtype=complex)
    v[0] = 1 / math.sqrt(2)
    v[1] = np.exp(1j * 0.4) / math.sqrt(2)
    assert trace_distance(pure, QuantumState.ket(v, (3,))) < 1e-12
    late = damped_superposition_single(40.0, res)
    assert late.data[0, 0].real == pytest.approx(1.0, abs=1e-12)


def test_damped_multi_matches_integrator():
    res = ResonatorParams(gamma=0.5, dim=5)
    start = damped_superposition_multi(3, 0.0, res)
    evolved = lindblad_evolve(start, 1.0, res)
    closed = damped_superposition_multi(3, 1.0, res)
    assert trace_distance(evolved, closed) < 1e-6


def test_damped_multi_with_kerr_matches_integrator():
    res = ResonatorParams(gamma=0.3, chi=0.8, dim=5)
    start = damped_superposition_multi(3, 0.0, res)
    evolved = lindblad_evolve(start, 0.7, res)
    closed = damped_superposition_multi(3, 0.7, res)
    assert trace_distance(evolved, closed) < 1e-6


def test_damped_multi_normalization():
    for n, gamma_tau in ((2, 0.2), (5, 1.5), (8, 4.0)):
        res = ResonatorParams(gamma=1.0, dim=n + 2)
        rho = damped_superposition_multi(n, gamma_tau, res)
        assert rho.data.trace().real == pytest.approx(1.0, abs=1e-12)


def test_damped_multi_pure_at_zero():
    res = ResonatorParams(gamma=0.7, dim=6)
    rho = damped_superposition_multi(4, 0.0, res)
    v = np.zeros(6, dtype=complex)
    v[0] = v[4] = 1 / math.sqrt(2)
    assert trace_distance(rho, QuantumState.ket(v, (6,))) < 1e-12


def test_damped_multi_needs_room():
    with pytest.raises(Exception):
        damped_superposition_multi(3, 0.1, ResonatorParams(gamma=0.1, dim=3))


def test_rk4_convergence_is_fourth_order():
    # halving the step should cut the error by about 2^4
    res = ResonatorParams(gamma=0.3, dim=3)
    start = damped_superposition_single(0.0, res)
    exact = damped_superposition_single(2.0, res)
    h = 0.05
    err_h = trace_distance(lindblad_evolve(start, 2.0, res, step=h), exact)
    err_h2 = trace_distance(lindblad_evolve(start, 2.0, res, step=h / 2), exact)
    ratio = err_h / err_h2
    assert 8.0 < ratio < 32.0


def test_effective_frequency_bounds():
    res = ResonatorParams(omega=1.0, chi=0.5, dim=4)
    assert effective_frequency(res, 1) == pytest.approx(1.0)
    assert effective_frequency(res, 3) == pytest.approx(2.0)
    assert effective_frequency(res, 3) >= res.omega
