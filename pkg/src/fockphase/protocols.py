"""Phase-measurement pulse schedules and their closed-form predictions.

A protocol is an ordered list of steps (qubit drive pulses, resonant
qubit-resonator exchange, free evolution, CNOT gates, final read-out of
qubit 1) executed on the composite (qubit 1 [, qubit 2], Fock) space.  The
runner works in the frame rotating at the bare frequencies: free evolution
contributes exactly the photon phase exp(-i omega_eff n tau) (plus loss when
dissipative), while drive and exchange segments contribute no extra phases
("paper mode").  An exact mode that also accrues the resonator phase during
gate segments is available for finite-duration studies.

The interferometric signal: preparing (|0> + |N>)/sqrt(2), letting the phase
phi = omega_eff N tau accumulate, unloading the photons onto qubit 1 through
the exchange/CNOT ladder, and reading qubit 1 after a pi/2 pulse gives

    P_e = 1/2 + (c/2) Re[i^(N+1) e^{i(phi - phi_m)}],

with c = epsilon^(N-1) e^{-Gamma N tau} and phi_m the read-out pulse phase.
At phi_m = 0 this reproduces the four N mod 4 probability branches used
throughout; phi_m = pi/2 swaps the measured quadrature for even N.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.optimize
import scipy.sparse

from .dynamics import (
    QubitParams,
    ResonatorParams,
    damped_superposition_multi,
    damped_superposition_single,
    effective_frequency,
    lindblad_evolve,
    u_drive,
    u_jc,
)
from .gates import CnotChannel, CouplerParams, ideal_cnot, imperfect_cnot
from .hilbert import (
    EXCITED,
    DimensionError,
    QuantumState,
    fidelity,
    fock_state,
    marginal_probability,
    partial_trace,
    product_state,
)

__all__ = [
    "TruncationError",
    "ScheduleError",
    "SystemParams",
    "QubitDrive",
    "JcInteraction",
    "FreeEvolve",
    "CnotGate",
    "MeasureQubit1",
    "PulseSchedule",
    "MeasurementRecord",
    "VisibilityResult",
    "single_photon_schedule",
    "law_eberly_schedule",
    "disentangle_schedule",
    "multi_photon_schedule",
    "run_protocol",
    "measured_pe_after_free",
    "predicted_pe",
    "visibility_single",
    "visibility_multi",
    "visibility_numeric",
    "schedule_to_text",
    "sample_excited",
]

_SPARSE_CUTOFF = 128  # composite dimension beyond which step operators go CSR


class TruncationError(RuntimeError):
    """Population reached the Fock guard level; results would be unreliable."""


class ScheduleError(RuntimeError):
    """A pulse-sequence construction failed to converge."""


@dataclass(frozen=True)
class SystemParams:
    """All physical constants of the two-qubit / resonator circuit."""

    res: ResonatorParams
    qubit1: QubitParams
    qubit2: QubitParams
    coupler: CouplerParams
    epsilon: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError(f"CNOT quality must be in (0, 1], got {self.epsilon}")

    @classmethod
    def default(
        cls,
        photons: int = 1,
        omega: float = 1.0,
        gamma: float = 0.0,
        chi: float = 0.0,
        epsilon: float = 1.0,
        g: float = 0.02,
        rabi: float = 0.02,
        lam: float = 0.05,
        dim: int | None = None,
    ) -> "SystemParams":
        """Resonant circuit sized for an N-photon run (one Fock guard level).

        Ideal runs occupy levels up to N.  Loss or imperfect gates leave
        populations mid-ladder that get pushed back up one level per
        unloading round (reaching 2N-4), so lossy defaults carry the
        larger ladder.
        """
        if dim is None:
            dim = required_fock_dim(photons, gamma > 0 or epsilon < 1.0)
        res = ResonatorParams(omega=omega, gamma=gamma, chi=chi, dim=dim)
        q = QubitParams(omega0=omega, g=g * omega, rabi=rabi * omega)
        return cls(res=res, qubit1=q, qubit2=q, coupler=CouplerParams(lam=lam * omega), epsilon=epsilon)

    def qubit(self, j: int) -> QubitParams:
        if j == 1:
            return self.qubit1
        if j == 2:
            return self.qubit2
        raise ValueError(f"qubit index must be 1 or 2, got {j}")


@dataclass(frozen=True)
class QubitDrive:
    qubit: int
    duration: float
    phase: float = 0.0


@dataclass(frozen=True)
class JcInteraction:
    qubit: int
    duration: float


@dataclass(frozen=True)
class FreeEvolve:
    duration: float
    dissipative: bool = False
    kerr: bool = False


@dataclass(frozen=True, eq=False)
class CnotGate:
    channel: CnotChannel


@dataclass(frozen=True)
class MeasureQubit1:
    pass


PulseStep = Union[QubitDrive, JcInteraction, FreeEvolve, CnotGate, MeasureQubit1]


@dataclass(frozen=True, eq=False)
class PulseSchedule:
    steps: tuple[PulseStep, ...]
    label: str = ""
    n_qubits: int = 1

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.n_qubits not in (1, 2):
            raise ValueError("schedules act on one or two qubits")
        measures = [i for i, s in enumerate(self.steps) if isinstance(s, MeasureQubit1)]
        if len(measures) > 1 or (measures and measures[0] != len(self.steps) - 1):
            raise ValueError("at most one measurement step, and it must come last")
        for s in self.steps:
            dur = getattr(s, "duration", 0.0)
            if dur < 0:
                raise ValueError("step durations must be nonnegative")
            target = getattr(s, "qubit", None)
            if target is not None and not 1 <= target <= self.n_qubits:
                raise ValueError(f"step targets qubit {target} outside layout")


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    p_excited: float
    final_state: QuantumState
    residual_entanglement: float
    leakage: float


@dataclass(frozen=True)
class VisibilityResult:
    value: float
    tau_peak: float
    branch: str  # "single", "odd", or "even"


def t_star(n: int, g: float) -> float:
    """Full-swap exchange duration pi / (2 g sqrt(n)) for the n-photon pair."""
    return math.pi / (2.0 * g * math.sqrt(n))


def required_fock_dim(photons: int, lossy: bool) -> int:
    """Smallest truncation keeping the guard level dark for an N-photon run.

    Ideal runs occupy levels up to N.  Photon loss or imperfect gates leave
    population branches mid-ladder that the remaining swap rounds push back
    up, one level per round, to at most 2N-4.
    """
    if lossy:
        return max(photons + 2, 2 * photons - 2)
    return photons + 2


# --------------------------------------------------------------------------
# schedule builders
# --------------------------------------------------------------------------

def single_photon_schedule(tau: float, params: SystemParams) -> PulseSchedule:
    """Interferometer for (|0> + |1>)/sqrt(2): pi/2 pulse, swap in, wait, swap out, pi/2 pulse."""
    q = params.qubit1
    ts = t_star(1, q.g)
    if tau < 10.0 * ts:
        warnings.warn(
            "free-evolution time is not much longer than the exchange pulse; "
            "paper-mode phases ignore the pulse durations",
            UserWarning,
            stacklevel=2,
        )
    half_pi = math.pi / (2.0 * q.rabi)
    steps = (
        QubitDrive(1, half_pi, q.drive_phase),
        JcInteraction(1, ts),
        FreeEvolve(tau, dissipative=params.res.gamma > 0, kerr=params.res.chi > 0),
        JcInteraction(1, ts),
        QubitDrive(1, half_pi, 0.0),
        MeasureQubit1(),
    )
    return PulseSchedule(steps, label="single-photon interferometer", n_qubits=1)


def _u2_dagger_inplace(g_amp: np.ndarray, e_amp: np.ndarray, g: float, t: float) -> None:
    dim = g_amp.shape[0]
    for n in range(1, dim):
        th = g * t * math.sqrt(n)
        c, s = math.cos(th), math.sin(th)
        gn, en = g_amp[n], e_amp[n - 1]
        g_amp[n] = c * gn + 1j * s * en
        e_amp[n - 1] = 1j * s * gn + c * en


def _u1_dagger_inplace(g_amp: np.ndarray, e_amp: np.ndarray, alpha: float, phi: float) -> None:
    c, s = math.cos(alpha), math.sin(alpha)
    gp = c * g_amp - 1j * np.exp(1j * phi) * s * e_amp
    ep = -1j * np.exp(-1j * phi) * s * g_amp + c * e_amp
    g_amp[:] = gp
    e_amp[:] = ep


def law_eberly_schedule(N: int, params: SystemParams, tol: float = 1e-9) -> PulseSchedule:
    """Drive/exchange ladder preparing (|0> + |N>)/sqrt(2) from |g, 0>.

    Solved by evolving the target backwards: each round empties the topmost
    Fock level with an exchange pulse and hands the excitation to the qubit,
    then a carrier pulse (angle and phase in closed form) returns the qubit
    to |g>.  When a round leaves the carrier phase free, it is fixed by the
    alignment requirement of the following exchange pulse.
    """
    if N < 1:
        raise ValueError(f"need at least one photon, got N={N}")
    dim = params.res.dim
    if dim <= N:
        raise DimensionError(f"Fock truncation {dim} cannot hold N={N}")
    q = params.qubit1
    g_amp = np.zeros(dim, dtype=complex)
    e_amp = np.zeros(dim, dtype=complex)
    g_amp[0] = g_amp[N] = 1.0 / math.sqrt(2.0)

    backward: list[PulseStep] = []
    for m in range(N, 0, -1):
        # exchange pulse zeroing the |g, m> amplitude
        if abs(g_amp[m]) > tol:
            if abs(e_amp[m - 1]) <= tol:
                theta = 0.5 * math.pi
            else:
                ratio = 1j * g_amp[m] / e_amp[m - 1]
                if abs(ratio.imag) > 1e-7 * max(1.0, abs(ratio)):
                    raise ScheduleError(
                        f"phase alignment failed at level {m} (ratio {ratio:.3e})"
                    )
                theta = math.atan(ratio.real)
                if theta < 0:
                    theta += math.pi
            t2 = theta / (q.g * math.sqrt(m))
            _u2_dagger_inplace(g_amp, e_amp, q.g, t2)
            backward.append(JcInteraction(1, t2))
        # carrier pulse zeroing the |e, m-1> amplitude
        if abs(e_amp[m - 1]) > tol:
            if abs(g_amp[m - 1]) <= tol:
                alpha = 0.5 * math.pi
                # free phase: align the next round's exchange condition
                if m >= 2 and abs(g_amp[m - 2]) > tol:
                    phi = -0.5 * float(np.angle(1j * e_amp[m - 1] / g_amp[m - 2]))
                else:
                    phi = 0.0
            else:
                phi = 0.5 * math.pi + float(np.angle(g_amp[m - 1]) - np.angle(e_amp[m - 1]))
                alpha = math.atan2(abs(e_amp[m - 1]), abs(g_amp[m - 1]))
            _u1_dagger_inplace(g_amp, e_amp, alpha, phi)
            backward.append(QubitDrive(1, 2.0 * alpha / q.rabi, phi % (2.0 * math.pi)))

    residual = 1.0 - abs(g_amp[0]) ** 2
    if residual > 1e-12 or np.max(np.abs(e_amp)) > 1e-8:
        raise ScheduleError(f"backward pass left residual population {residual:.3e}")

    schedule = PulseSchedule(
        tuple(reversed(backward)), label=f"prepare (|0>+|{N}>)/sqrt2", n_qubits=1
    )
    # independent forward check through the runner
    record = run_protocol(schedule, params)
    target = _superposition_ket(N, dim)
    reached = partial_trace(record.final_state, [1])
    if fidelity(reached, QuantumState(target, (dim,))) < 1.0 - 1e-8:
        raise ScheduleError("forward replay missed the target superposition")
    return schedule


def _superposition_ket(N: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[0] = v[N] = 1.0 / math.sqrt(2.0)
    return v


def disentangle_schedule(
    N: int, params: SystemParams, channel: CnotChannel | None = None
) -> PulseSchedule:
    """Photon-unloading ladder: exchange swaps interleaved with N-1 CNOT gates.

    Sequence (qubit 1 swap at the N-photon rate, then qubit 2 swaps walking
    down the ladder with a CNOT before each) drains the |N> component to the
    vacuum while the accumulated phase ends up on qubit 1.
    """
    if N < 2:
        raise ValueError(f"disentanglement ladder needs N >= 2, got {N}")
    if channel is None:
        channel = ideal_cnot() if params.epsilon == 1.0 else imperfect_cnot(params.epsilon)
    g1 = params.qubit1.g
    if not math.isclose(g1, params.qubit2.g, rel_tol=1e-9):
        warnings.warn(
            "qubit couplings differ; swap durations use the qubit-1 coupling",
            UserWarning,
            stacklevel=2,
        )
    steps: list[PulseStep] = [
        JcInteraction(1, t_star(N, g1)),
        JcInteraction(2, t_star(N - 1, g1)),
    ]
    for n in range(N - 2, 0, -1):
        steps.append(CnotGate(channel))
        steps.append(JcInteraction(2, t_star(n, g1)))
    steps.append(CnotGate(channel))
    return PulseSchedule(tuple(steps), label=f"unload {N} photons", n_qubits=2)


def multi_photon_schedule(
    N: int,
    tau: float,
    params: SystemParams,
    channel: CnotChannel | None = None,
    include_prep: bool = True,
    measure_phase: float = 0.0,
) -> PulseSchedule:
    """Full N-photon interferometer: prepare, wait, unload, read out qubit 1."""
    if N < 2:
        raise ValueError("use single_photon_schedule for N=1")
    steps: list[PulseStep] = []
    if include_prep:
        steps.extend(law_eberly_schedule(N, params).steps)
    steps.append(
        FreeEvolve(tau, dissipative=params.res.gamma > 0, kerr=params.res.chi > 0)
    )
    steps.extend(disentangle_schedule(N, params, channel).steps)
    steps.append(QubitDrive(1, math.pi / (2.0 * params.qubit1.rabi), measure_phase))
    steps.append(MeasureQubit1())
    return PulseSchedule(tuple(steps), label=f"{N}-photon interferometer", n_qubits=2)


# --------------------------------------------------------------------------
# runner
# --------------------------------------------------------------------------

def _embed(mat: np.ndarray, axes: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Lift an operator on the given subsystem axes to the full space."""
    dims = tuple(dims)
    axes = tuple(axes)
    n = len(dims)
    rest = tuple(i for i in range(n) if i not in axes)
    other = int(np.prod([dims[r] for r in rest], initial=1))
    big = np.kron(mat, np.eye(other, dtype=complex))
    order = axes + rest
    shaped = big.reshape([dims[o] for o in order] * 2)
    perm = [order.index(i) for i in range(n)]
    shaped = shaped.transpose(perm + [n + p for p in perm])
    d = int(np.prod(dims))
    return np.ascontiguousarray(shaped.reshape(d, d))


def _storage_form(mat: np.ndarray):
    """Dense for small spaces, CSR beyond the cutoff (step operators are sparse)."""
    if mat.shape[0] >= _SPARSE_CUTOFF:
        return scipy.sparse.csr_matrix(mat)
    return mat


_OP_CACHE: dict = {}
_OP_CACHE_LIMIT = 256


def _cached_op(key, builder):
    op = _OP_CACHE.get(key)
    if op is None:
        if len(_OP_CACHE) >= _OP_CACHE_LIMIT:
            _OP_CACHE.clear()
        op = builder()
        _OP_CACHE[key] = op
    return op


def _apply_unitary(mat, state: QuantumState) -> QuantumState:
    if scipy.sparse.issparse(mat):
        if state.is_ket:
            return QuantumState(mat @ state.data, state.dims)
        # rho is Hermitian, so U rho U^dag = U (U rho)^dag
        x = mat @ state.data
        return QuantumState(mat @ x.conj().T, state.dims)
    if state.is_ket:
        return QuantumState(mat @ state.data, state.dims)
    return QuantumState(mat @ state.data @ mat.conj().T, state.dims)


def _apply_kraus(kraus, state: QuantumState) -> QuantumState:
    rho = state.to_density().data
    out = np.zeros_like(rho)
    for k in kraus:
        if scipy.sparse.issparse(k):
            out += k @ (k @ rho).conj().T
        else:
            out += k @ rho @ k.conj().T
    return QuantumState(out, state.dims)


def _top_level_population(state: QuantumState) -> float:
    dim = state.dims[-1]
    if state.is_ket:
        v = state.data.reshape(-1, dim)
        return float(np.sum(np.abs(v[:, dim - 1]) ** 2))
    diag = np.real(np.diagonal(state.data)).reshape(-1, dim)
    return float(np.sum(diag[:, dim - 1]))


def _field_phase_diag(dims: tuple[int, ...], res: ResonatorParams, t: float, kerr: bool) -> np.ndarray:
    n = np.arange(res.dim, dtype=float)
    energy = res.omega * n
    if kerr:
        energy = energy + res.chi * n * (n - 1)
    phases = np.exp(-1j * energy * t)
    nrest = int(np.prod(dims[:-1], initial=1))
    return np.tile(phases, nrest)


def _bare_phase_diag(params: SystemParams, n_qubits: int, t: float) -> np.ndarray:
    """Full lab-frame phase diag over (qubits..., Fock) for the exact mode."""
    diag = np.exp(-1j * params.res.omega * np.arange(params.res.dim) * t)
    for j in range(n_qubits, 0, -1):
        w0 = params.qubit(j).omega0
        qphase = np.exp(-1j * 0.5 * w0 * np.array([-1.0, 1.0]) * t)
        diag = np.kron(qphase, diag)
    return diag


def _apply_diag(diag: np.ndarray, state: QuantumState) -> QuantumState:
    if state.is_ket:
        return QuantumState(diag * state.data, state.dims)
    return QuantumState(diag[:, None] * state.data * diag.conj()[None, :], state.dims)


def run_protocol(
    schedule: PulseSchedule,
    params: SystemParams,
    initial_state: QuantumState | None = None,
    paper_mode: bool = True,
    leak_threshold: float = 1e-10,
) -> MeasurementRecord:
    """Execute a schedule and report the qubit-1 excitation probability.

    Pure states are propagated as kets until a dissipative or multi-Kraus
    step forces a density matrix.  In paper mode only free evolution carries
    resonator phases.  The exact mode also applies the full bare-frequency
    phases (qubits and field) for each timed segment, which at resonance is
    the exact lab-frame evolution since every pulse propagator factors as
    (bare phases) x (rotating-frame pulse); the CNOT contributes its coupler
    construction time.  The top Fock level is monitored at every step and a
    TruncationError is raised if it ever exceeds ``leak_threshold``.
    """
    dims = (2,) * schedule.n_qubits + (params.res.dim,)
    if initial_state is None:
        factors = [fock_state(0, 2) for _ in range(schedule.n_qubits)]
        factors.append(fock_state(0, params.res.dim))
        state = product_state(*factors)
    else:
        if tuple(initial_state.dims) != dims:
            raise DimensionError(
                f"initial state dims {initial_state.dims} != schedule layout {dims}"
            )
        state = initial_state
    fock_axis = schedule.n_qubits
    leakage = _top_level_population(state)

    for step in schedule.steps:
        if isinstance(step, QubitDrive):
            key = ("drive", dims, step.qubit, params.qubit(step.qubit).rabi,
                   step.duration, step.phase)
            op = _cached_op(key, lambda: _storage_form(_embed(
                u_drive(
                    dataclasses.replace(params.qubit(step.qubit), drive_phase=step.phase),
                    step.duration,
                ).matrix,
                (step.qubit - 1,), dims,
            )))
            state = _apply_unitary(op, state)
            extra_t = step.duration
        elif isinstance(step, JcInteraction):
            key = ("jc", dims, step.qubit, params.qubit(step.qubit).g, step.duration)
            op = _cached_op(key, lambda: _storage_form(_embed(
                u_jc(params.qubit(step.qubit), step.duration, params.res.dim).matrix,
                (step.qubit - 1, fock_axis), dims,
            )))
            state = _apply_unitary(op, state)
            extra_t = step.duration
        elif isinstance(step, FreeEvolve):
            if step.dissipative and params.res.gamma > 0:
                res_eff = params.res if step.kerr else dataclasses.replace(params.res, chi=0.0)
                state = lindblad_evolve(state.to_density(), step.duration, res_eff)
            else:
                diag = _field_phase_diag(dims, params.res, step.duration, step.kerr)
                state = _apply_diag(diag, state)
            extra_t = 0.0
        elif isinstance(step, CnotGate):
            if schedule.n_qubits != 2:
                raise ScheduleError("CNOT steps need the two-qubit layout")
            ch = step.channel
            key = ("cnot", dims, ch.epsilon, ch.residuals.tobytes())
            kraus_full = _cached_op(key, lambda: tuple(
                _storage_form(np.kron(k, np.eye(params.res.dim, dtype=complex)))
                for k in ch.kraus
            ))
            if len(kraus_full) == 1 and state.is_ket:
                state = _apply_unitary(kraus_full[0], state)
            else:
                state = _apply_kraus(kraus_full, state)
            extra_t = params.coupler.gate_time()
        elif isinstance(step, MeasureQubit1):
            break
        else:
            raise ScheduleError(f"unknown step {step!r}")
        if not paper_mode and extra_t > 0:
            state = _apply_diag(_bare_phase_diag(params, schedule.n_qubits, extra_t), state)
        leakage = max(leakage, _top_level_population(state))
        if leakage > leak_threshold:
            raise TruncationError(
                f"top Fock level reached population {leakage:.3e} during {step!r}"
            )

    p_e = marginal_probability(state, 0, EXCITED)
    if schedule.n_qubits == 2:
        remainder = partial_trace(state, [1, 2])
        target = product_state(fock_state(0, 2), fock_state(0, params.res.dim))
    else:
        remainder = partial_trace(state, [1])
        target = fock_state(0, params.res.dim)
    residual = 1.0 - fidelity(remainder, target)
    return MeasurementRecord(
        p_excited=p_e,
        final_state=state,
        residual_entanglement=residual,
        leakage=leakage,
    )


def measured_pe_after_free(
    N: int,
    tau: float,
    params: SystemParams,
    channel: CnotChannel | None = None,
    measure_phase: float = 0.0,
) -> MeasurementRecord:
    """Closed-form damped free segment fed through the exact gate remainder.

    The state at the end of the free evolution is written down analytically
    (loss only acts while the gates are off), then the unloading ladder and
    read-out run on the simulator.  Equivalent to integrating the free
    segment, but exact and cheap for any tau.
    """
    res = params.res
    lossy = (
        res.gamma > 0
        or params.epsilon < 1.0
        or (channel is not None and len(channel.kraus) > 1)
    )
    if N >= 2 and lossy:
        needed = required_fock_dim(N, lossy=True)
        if res.dim < needed:
            res = dataclasses.replace(res, dim=needed)
            params = dataclasses.replace(params, res=res)
    if N == 1:
        field = damped_superposition_single(tau, res)
        qubit_g = np.zeros((2, 2), dtype=complex)
        qubit_g[0, 0] = 1.0
        init = QuantumState(np.kron(qubit_g, field.data), (2, res.dim))
        q = params.qubit1
        steps = (
            JcInteraction(1, t_star(1, q.g)),
            QubitDrive(1, math.pi / (2.0 * q.rabi), measure_phase),
            MeasureQubit1(),
        )
        schedule = PulseSchedule(steps, label="single-photon read-out", n_qubits=1)
    else:
        field = damped_superposition_multi(N, tau, res)
        qq = np.zeros((4, 4), dtype=complex)
        qq[0, 0] = 1.0
        init = QuantumState(np.kron(qq, field.data), (2, 2, res.dim))
        steps = disentangle_schedule(N, params, channel).steps + (
            QubitDrive(1, math.pi / (2.0 * params.qubit1.rabi), measure_phase),
            MeasureQubit1(),
        )
        schedule = PulseSchedule(steps, label=f"{N}-photon read-out", n_qubits=2)
    return run_protocol(schedule, params, initial_state=init)


# --------------------------------------------------------------------------
# closed-form predictions
# --------------------------------------------------------------------------

def predicted_pe(N: int, phi: float, gamma_tau: float = 0.0, epsilon: float = 1.0) -> float:
    """Qubit-1 excitation probability for the N mod 4 branch table.

    The coherence coefficient is c = epsilon^(N-1) e^{-N Gamma tau}; N=1
    reduces to the damped single-photon fringe (1 - e^{-Gamma tau} cos phi)/2.
    """
    if N < 1:
        raise ValueError(f"photon number must be >= 1, got {N}")
    c = epsilon ** (N - 1) * math.exp(-N * gamma_tau)
    r = N % 4
    if r == 0:
        return 0.5 * (1.0 - c * math.sin(phi))
    if r == 3:
        return 0.5 * (1.0 + c * math.cos(phi))
    if r == 2:
        return 0.5 * (1.0 + c * math.sin(phi))
    return 0.5 * (1.0 - c * math.cos(phi))


def _odd_visibility(w_eff: float, gamma: float, prefactor: float) -> tuple[float, float]:
    tau_1 = math.acos(-((1.0 + (gamma / w_eff) ** 2) ** -0.5)) / w_eff
    value = 0.5 * prefactor * (
        1.0 + (w_eff**2 / (w_eff**2 + gamma**2)) ** 0.5 * math.exp(-gamma * tau_1)
    )
    return value, tau_1


def visibility_single(res: ResonatorParams) -> VisibilityResult:
    """Closed-form fringe visibility of the single-photon interferometer.

    V = [1 + sqrt(omega^2/(omega^2+Gamma^2)) e^{-Gamma tau_m}]/2 with the
    first fringe minimum at tau_m in [pi/2, pi]/omega; unity without loss.
    """
    value, tau_m = _odd_visibility(res.omega, res.gamma, 1.0)
    return VisibilityResult(value=value, tau_peak=tau_m, branch="single")


def visibility_multi(N: int, res: ResonatorParams, epsilon: float = 1.0) -> VisibilityResult:
    """Closed-form N-photon visibility with the Kerr-shifted frequency.

    Odd N keeps the single-photon form scaled by epsilon^(N-1) with
    omega -> omega + chi(N-1); even N reads the other quadrature, for which
    the two fringe extrema give (epsilon^(N-1)/2)(e^{-pi Gamma/2 w} +
    e^{-3 pi Gamma/2 w}), a small-Gamma/w approximation.
    """
    if N < 1:
        raise ValueError(f"photon number must be >= 1, got {N}")
    w_eff = effective_frequency(res, N)
    pref = epsilon ** (N - 1)
    if N == 1:
        value, tau = _odd_visibility(w_eff, res.gamma, pref)
        return VisibilityResult(value=value, tau_peak=tau, branch="single")
    if N % 2 == 1:
        value, tau = _odd_visibility(w_eff, res.gamma, pref)
        return VisibilityResult(value=value, tau_peak=tau, branch="odd")
    ratio = res.gamma / w_eff
    value = 0.5 * pref * (math.exp(-0.5 * math.pi * ratio) + math.exp(-1.5 * math.pi * ratio))
    return VisibilityResult(value=value, tau_peak=0.5 * math.pi / w_eff, branch="even")


def _coherence_factor(N: int, res: ResonatorParams, epsilon: float):
    """C(s) with s the per-photon phase time (damping e^{-Gamma s}, phase w_eff s)."""
    w_eff = effective_frequency(res, N)
    pref = epsilon ** (N - 1)
    trig = np.cos if (N % 2 == 1) else np.sin
    return lambda s: pref * np.exp(-res.gamma * s) * trig(w_eff * s), w_eff


def visibility_numeric(
    N: int, res: ResonatorParams, epsilon: float = 1.0, samples: int = 200_001
) -> VisibilityResult:
    """Brute-force extremum search of the coherence factor over [0, 4 pi / w_eff]."""
    c_func, w_eff = _coherence_factor(N, res, epsilon)
    s = np.linspace(0.0, 4.0 * math.pi / w_eff, samples)
    values = c_func(s)

    def refine(idx: int, sign: float) -> tuple[float, float]:
        lo = s[max(idx - 1, 0)]
        hi = s[min(idx + 1, samples - 1)]
        r = scipy.optimize.minimize_scalar(
            lambda x: sign * c_func(x), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-14},
        )
        return float(sign * r.fun), float(r.x)

    c_max, s_max = refine(int(np.argmax(values)), -1.0)
    c_min, s_min = refine(int(np.argmin(values)), 1.0)
    branch = "single" if N == 1 else ("odd" if N % 2 == 1 else "even")
    peak = s_min if branch in ("single", "odd") else s_max
    return VisibilityResult(value=0.5 * (c_max - c_min), tau_peak=peak, branch=branch)


# --------------------------------------------------------------------------
# serialization and sampling
# --------------------------------------------------------------------------

def schedule_to_text(schedule: PulseSchedule, omega: float = 1.0) -> str:
    """Line-oriented dump: kind, target, duration (units of 1/omega), extras."""
    lines = [f"# {schedule.label} (qubits={schedule.n_qubits})"]
    for step in schedule.steps:
        if isinstance(step, QubitDrive):
            lines.append(f"drive {step.qubit} {step.duration * omega:.9f} phase={step.phase:.9f}")
        elif isinstance(step, JcInteraction):
            lines.append(f"jc {step.qubit} {step.duration * omega:.9f}")
        elif isinstance(step, FreeEvolve):
            lines.append(
                f"free - {step.duration * omega:.9f} "
                f"dissipative={int(step.dissipative)} kerr={int(step.kerr)}"
            )
        elif isinstance(step, CnotGate):
            lines.append(f"cnot 12 epsilon={step.channel.epsilon:.9f}")
        elif isinstance(step, MeasureQubit1):
            lines.append("measure 1")
    return "\n".join(lines) + "\n"


def sample_excited(p: float, shots: int, seed: int | None = None) -> int:
    """Binomial read-out counts for a given excitation probability."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability outside [0, 1]: {p}")
    if shots < 1:
        raise ValueError("need at least one shot")
    rng = np.random.default_rng(seed)
    return int(rng.binomial(shots, p))
