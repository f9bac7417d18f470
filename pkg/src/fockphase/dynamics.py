"""Hamiltonians, closed-form evolution operators, and photon-loss dynamics.

Conventions: hbar = 1, and the resonator frequency defaults to omega = 1 so
that every rate is the dimensionless ratio to omega (damping and Kerr
strengths of interest are specified as Gamma/omega and chi/omega).  All
closed-form propagators are written in the frame rotating at the bare
frequencies; free evolution therefore contributes photon phases
exp(-i omega n t), and qubit carrier phases are absorbed into pulse phases.

The dissipative channel is single-mode photon loss,

    drho/dt = -i[H, rho] + Gamma (2 a rho a^dag - a^dag a rho - rho a^dag a),

with H = omega a^dag a (+ chi a^dag^2 a^2 when the Kerr medium is on), so
populations decay at 2*Gamma and the |0><n| coherence at n*Gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hilbert import (
    DimensionError,
    Operator,
    QuantumState,
    ladder_ops,
    sigma_minus,
    sigma_plus,
    sigma_z,
    tensor,
)

__all__ = [
    "ResonatorParams",
    "QubitParams",
    "DressedPair",
    "effective_frequency",
    "u_free",
    "u_drive",
    "u_jc",
    "u_kerr",
    "jc_hamiltonian",
    "dressed_states",
    "lindblad_evolve",
    "damped_superposition_single",
    "damped_superposition_multi",
]


@dataclass(frozen=True)
class ResonatorParams:
    """Single-mode resonator: frequency, photon-loss rate, Kerr strength, truncation."""

    omega: float = 1.0
    gamma: float = 0.0
    chi: float = 0.0
    dim: int = 3

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.chi < 0:
            raise ValueError(f"chi must be nonnegative, got {self.chi}")
        if self.dim < 2:
            raise DimensionError(f"Fock truncation must be >= 2, got {self.dim}")


@dataclass(frozen=True)
class QubitParams:
    """One qubit: transition frequency, resonator coupling, and drive settings."""

    omega0: float = 1.0
    g: float = 0.02
    rabi: float = 0.02
    drive_phase: float = 0.0
    drive_freq: float | None = None  # None means resonant drive (omega_q = omega0)

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError(f"coupling g must be positive, got {self.g}")
        if self.rabi < 0:
            raise ValueError(f"drive amplitude must be nonnegative, got {self.rabi}")

    def detuning(self, omega: float) -> float:
        return self.omega0 - omega

    def drive_detuning(self) -> float:
        wq = self.omega0 if self.drive_freq is None else self.drive_freq
        return self.omega0 - wq


@dataclass(frozen=True)
class DressedPair:
    """Eigen-solution of one resonant-exchange block {|g,n>, |e,n-1>}.

    ``eigvals`` is (lambda_plus, lambda_minus), ``mixing`` is (sin_beta,
    cos_beta), and ``delta`` their splitting.  The plus branch adiabatically
    connects to |e,n-1> and the minus branch to |g,n> as the detuning grows.
    """

    eigvals: tuple[float, float]
    mixing: tuple[float, float]
    delta: float

    def vector_plus(self) -> np.ndarray:
        """Eigenvector of lambda_plus in the ordered basis (|g,n>, |e,n-1>)."""
        s, c = self.mixing
        return np.array([c, -s], dtype=complex)

    def vector_minus(self) -> np.ndarray:
        s, c = self.mixing
        return np.array([s, c], dtype=complex)


def effective_frequency(res: ResonatorParams, photons: int) -> float:
    """Kerr-shifted frequency omega + chi*(N-1) seen by an N-photon component."""
    return res.omega + res.chi * (photons - 1)


def _kerr_phases(dim: int, chi: float, t: float) -> np.ndarray:
    n = np.arange(dim)
    return np.exp(-1j * chi * n * (n - 1) * t)


def u_free(t: float, res: ResonatorParams, qubits: Sequence[QubitParams] = ()) -> Operator:
    """Bare-frequency propagator exp[-i(omega n_hat + sum_j omega0_j sigma_jz / 2) t].

    Diagonal on the composite (qubit..., Fock) layout.
    """
    if t < 0:
        raise ValueError("duration must be nonnegative")
    diag = np.exp(-1j * res.omega * np.arange(res.dim) * t)
    for q in reversed(qubits):
        qphase = np.exp(-1j * 0.5 * q.omega0 * np.array([-1.0, 1.0]) * t)
        diag = np.kron(qphase, diag)
    dims = (2,) * len(qubits) + (res.dim,)
    return Operator(np.diag(diag), dims)


def u_drive(q: QubitParams, t: float) -> Operator:
    """Resonant carrier pulse on one qubit.

    U(t) = cos(Omega t / 2) I + i sin(Omega t / 2) [e^{-i phi} s+ + e^{i phi} s-],
    so a duration pi/(2 Omega) with phi = 0 maps |g> to (|g> + i|e>)/sqrt(2).
    """
    half = 0.5 * q.rabi * t
    phase = q.drive_phase
    u = math.cos(half) * np.eye(2, dtype=complex) + 1j * math.sin(half) * (
        np.exp(-1j * phase) * sigma_plus() + np.exp(1j * phase) * sigma_minus()
    )
    return Operator(u, (2,))


def u_jc(q: QubitParams, t: float, dim: int) -> Operator:
    """Resonant exchange propagator on (qubit, Fock).

    Block rotation by theta_n = g t sqrt(n) inside each {|g,n>, |e,n-1>} pair:
    |g,n> -> cos(theta_n)|g,n> - i sin(theta_n)|e,n-1> and symmetrically.
    |g,0> and the truncated top level |e,dim-1> are left untouched, which
    coincides with the matrix exponential of the truncated coupling.
    """
    u = np.eye(2 * dim, dtype=complex)
    for n in range(1, dim):
        th = q.g * t * math.sqrt(n)
        gi = n            # flat index of |g,n>
        ei = dim + n - 1  # flat index of |e,n-1>
        c, s = math.cos(th), math.sin(th)
        u[gi, gi] = c
        u[ei, ei] = c
        u[gi, ei] = -1j * s
        u[ei, gi] = -1j * s
    return Operator(u, (2, dim))


def u_kerr(t: float, res: ResonatorParams) -> Operator:
    """Kerr propagator exp[-i chi n(n-1) t], diagonal on the Fock ladder."""
    if t < 0:
        raise ValueError("duration must be nonnegative")
    return Operator(np.diag(_kerr_phases(res.dim, res.chi, t)), (res.dim,))


def jc_hamiltonian(q: QubitParams, res: ResonatorParams) -> Operator:
    """Lab-frame H = omega n_hat + (omega0/2) sigma_z + g (a s+ + s- a^dag) on (qubit, Fock).

    Used for dense-exponential cross checks and for off-resonant (detuned)
    evolution, which has no closed form here.
    """
    dim = res.dim
    a, adag = ladder_ops(dim)
    nop = Operator(np.diag(np.arange(dim, dtype=complex)), (dim,))
    i2 = Operator(np.eye(2, dtype=complex), (2,))
    ifock = Operator(np.eye(dim, dtype=complex), (dim,))
    h = (
        res.omega * tensor([i2, nop]).matrix
        + 0.5 * q.omega0 * tensor([Operator(sigma_z(), (2,)), ifock]).matrix
        + q.g
        * (
            tensor([Operator(sigma_plus(), (2,)), a]).matrix
            + tensor([Operator(sigma_minus(), (2,)), adag]).matrix
        )
    )
    return Operator(h, (2, dim))


def dressed_states(q: QubitParams, n: int, omega: float) -> DressedPair:
    """Closed-form eigen-pair of the exchange block with n total excitations.

    lambda_pm = omega (n - 1/2) +- delta/2 with delta = sqrt(Delta^2 + 4 g^2 n),
    and mixing amplitudes

        sin_beta = -(Delta + delta) / D,   cos_beta = 2 g sqrt(n) / D,
        D = sqrt((Delta + delta)^2 + 4 g^2 n).

    The (sin_beta, cos_beta) vector belongs to lambda_minus and the orthogonal
    (cos_beta, -sin_beta) vector to lambda_plus; in the far-detuned limit the
    pair reduces to the bare states, which is what turns the coupling off.
    """
    if n < 1:
        raise ValueError(f"need at least one excitation in the block, got n={n}")
    delta_q = q.omega0 - omega
    delta = math.sqrt(delta_q**2 + 4.0 * q.g**2 * n)
    mean = omega * (n - 0.5)
    d = math.sqrt((delta_q + delta) ** 2 + 4.0 * q.g**2 * n)
    sin_b = -(delta_q + delta) / d
    cos_b = 2.0 * q.g * math.sqrt(n) / d
    return DressedPair(
        eigvals=(mean + 0.5 * delta, mean - 0.5 * delta),
        mixing=(sin_b, cos_b),
        delta=delta,
    )


def default_step(res: ResonatorParams) -> float:
    """Fixed RK4 step: resolve the fastest Kerr-shifted phase and the decay."""
    omega_max = res.omega + res.chi * (res.dim - 1)
    h = 2.0 * math.pi / (200.0 * omega_max * res.dim)
    if res.gamma > 0:
        h = min(h, 1.0 / (200.0 * res.gamma))
    return h


def _loss_rhs_factory(dims: tuple[int, ...], res: ResonatorParams):
    """Elementwise Lindblad right-hand side on a composite (..., Fock) layout.

    All operators involved (n_hat, the Kerr diagonal, and the jump a) act on
    the trailing Fock factor, so the generator reduces to index shifts and
    diagonal weights; no matrix products are needed.
    """
    dim = res.dim
    nrest = int(np.prod(dims[:-1], initial=1))
    n = np.arange(dim, dtype=float)
    energy = res.omega * n + res.chi * n * (n - 1)
    e_full = np.tile(energy, nrest)
    n_full = np.tile(n, nrest)
    phase = -1j * (e_full[:, None] - e_full[None, :])
    decay = n_full[:, None] + n_full[None, :]
    gamma = res.gamma
    shape4 = (nrest, dim, nrest, dim)
    # sqrt((n+1)(m+1)) weights for the a rho a^dag shift, shaped for (..., n, ..., m)
    w = np.sqrt(np.outer(n[1:], n[1:]))[None, :, None, :]

    def rhs(rho: np.ndarray) -> np.ndarray:
        out = phase * rho
        if gamma > 0:
            out -= gamma * decay * rho
            r4 = rho.reshape(shape4)
            feed = np.zeros(shape4, dtype=complex)
            feed[:, : dim - 1, :, : dim - 1] = w * r4[:, 1:, :, 1:]
            out += 2.0 * gamma * feed.reshape(rho.shape)
        return out

    return rhs


def lindblad_evolve(
    state: QuantumState,
    t: float,
    res: ResonatorParams,
    step: float | None = None,
) -> QuantumState:
    """Integrate the photon-loss master equation for time t (fixed-step RK4).

    The state may be the bare Fock mode or any composite whose trailing factor
    is the Fock space; leading qubit factors idle while the photon field
    damps.  The Kerr term is included automatically when res.chi > 0.
    """
    if t < 0:
        raise ValueError("duration must be nonnegative")
    if state.dims[-1] != res.dim:
        raise DimensionError(
            f"trailing factor {state.dims[-1]} != resonator truncation {res.dim}"
        )
    rho = state.to_density().data.copy()
    if t == 0:
        return QuantumState(rho, state.dims)
    h = default_step(res) if step is None else float(step)
    steps = max(1, math.ceil(t / h))
    h = t / steps
    rhs = _loss_rhs_factory(state.dims, res)
    for _ in range(steps):
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * h * k1)
        k3 = rhs(rho + 0.5 * h * k2)
        k4 = rhs(rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    rho = 0.5 * (rho + rho.conj().T)  # enforce Hermiticity against drift
    return QuantumState(rho, state.dims)


def damped_superposition_single(
    tau: float, res: ResonatorParams, phase0: float = 0.0
) -> QuantumState:
    """Damped (|0> + e^{i phase0}|1>)/sqrt(2) after free evolution for tau.

    Populations relax as rho_11 = e^{-2 Gamma tau}/2 while the coherence keeps
    its full phase record: <0|rho|1> = e^{-Gamma tau} e^{i(omega tau - phase0)}/2.
    """
    if tau < 0:
        raise ValueError("duration must be nonnegative")
    dim = res.dim
    decay = math.exp(-2.0 * res.gamma * tau)
    coh = 0.5 * math.exp(-res.gamma * tau) * np.exp(1j * (res.omega * tau - phase0))
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 0.5 * (2.0 - decay)
    rho[1, 1] = 0.5 * decay
    rho[0, 1] = coh
    rho[1, 0] = np.conj(coh)
    return QuantumState(rho, (dim,))


def damped_superposition_multi(N: int, tau: float, res: ResonatorParams) -> QuantumState:
    """Damped (|0> + |N>)/sqrt(2) after free evolution for tau.

    The diagonal follows the binomial decay cascade out of |N> (each photon
    survives with probability e^{-2 Gamma tau}) on top of the undisturbed
    vacuum half, and the only coherence is
    <0|rho|N> = e^{i omega_eff N tau - Gamma N tau}/2 with the Kerr-shifted
    omega_eff = omega + chi (N - 1).
    """
    if N < 2:
        raise ValueError(f"multi-photon form needs N >= 2, got {N}")
    if res.dim <= N:
        raise DimensionError(f"Fock truncation {res.dim} too small for N={N}")
    if tau < 0:
        raise ValueError("duration must be nonnegative")
    dim = res.dim
    s = math.exp(-2.0 * res.gamma * tau)  # single-photon survival probability
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 0.5
    for k in range(N + 1):
        rho[k, k] += 0.5 * math.comb(N, k) * s**k * (1.0 - s) ** (N - k)
    w_eff = effective_frequency(res, N)
    coh = 0.5 * math.exp(-res.gamma * N * tau) * np.exp(1j * w_eff * N * tau)
    rho[0, N] = coh
    rho[N, 0] = np.conj(coh)
    return QuantumState(rho, (dim,))
