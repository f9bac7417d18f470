"""Two-qubit CNOT operations as quantum channels.

The gate acts on the (qubit 1, qubit 2) pair with qubit 1 as control:
|gg> -> |gg>, |ge> -> |ge>, |eg> -> |ee>, |ee> -> |eg>.  Two-qubit basis
states are enumerated 0=|gg>, 1=|ge>, 2=|ee>, 3=|eg> when talking about
channel matrix elements, matching the control/target truth table above.

A non-ideal gate is modeled by a quality parameter epsilon in (0, 1]: the
ideal unitary is applied with weight epsilon while the complementary weight
falls on basis-diagonal projectors, so every two-qubit coherence is scaled
by exactly epsilon per application while populations still land on their
ideal images with weight epsilon.  Repeating the gate N-1 times through the
photon-unloading ladder therefore leaves a qubit-1 coherence of epsilon^(N-1).
Optional residual weights let population leak to arbitrary wrong basis
states, modeling the small off-map terms of a tomographically characterized
gate; they are clipped so the channel stays trace preserving.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import DimensionError, Operator, QuantumState

__all__ = [
    "CouplerParams",
    "CnotChannel",
    "ideal_cnot",
    "imperfect_cnot",
    "apply_channel",
    "iswap_cnot_time",
    "qubit_coupling_hamiltonian",
    "choi_matrix",
]

# basis enumeration used for channel elements: |gg>, |ge>, |ee>, |eg>
_LABEL_TO_INDEX = (0, 1, 3, 2)  # channel label k -> flat (q1*2 + q2) index


def _cnot_matrix() -> np.ndarray:
    u = np.eye(4, dtype=complex)
    # flat indices: 2 = |eg>, 3 = |ee> swap when control is excited
    u[[2, 3]] = u[[3, 2]]
    return u


@dataclass(frozen=True)
class CouplerParams:
    """Capacitive qubit-qubit exchange coupling and the derived gate duration."""

    lam: float
    t_c: float | None = None  # CNOT duration; defaults to two exchange segments

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"coupling strength must be positive, got {self.lam}")

    def gate_time(self) -> float:
        if self.t_c is not None:
            return self.t_c
        return 2.0 * iswap_cnot_time(self)


@dataclass(frozen=True, eq=False)
class CnotChannel:
    """CPTP map on the two-qubit factor, given by its Kraus family."""

    epsilon: float
    kraus: tuple[np.ndarray, ...]
    residuals: np.ndarray = field(default_factory=lambda: np.zeros((4, 4)))

    def __post_init__(self):
        ks = []
        for k in self.kraus:
            k = np.ascontiguousarray(k, dtype=complex)
            if k.shape != (4, 4):
                raise DimensionError(f"Kraus operator must be 4x4, got {k.shape}")
            k.setflags(write=False)
            ks.append(k)
        object.__setattr__(self, "kraus", tuple(ks))
        r = np.ascontiguousarray(self.residuals, dtype=float)
        r.setflags(write=False)
        object.__setattr__(self, "residuals", r)
        comp = sum(k.conj().T @ k for k in self.kraus)
        if np.max(np.abs(comp - np.eye(4))) > 1e-10:
            raise ValueError("Kraus family is not trace preserving")

    def element(self, out_bra: int, in_row: int, in_col: int, out_ket: int) -> complex:
        """<out_bra| E(|in_row><in_col|) |out_ket> in the gg,ge,ee,eg enumeration."""
        i = _LABEL_TO_INDEX[in_row]
        j = _LABEL_TO_INDEX[in_col]
        unit = np.zeros((4, 4), dtype=complex)
        unit[i, j] = 1.0
        out = sum(k @ unit @ k.conj().T for k in self.kraus)
        return complex(out[_LABEL_TO_INDEX[out_bra], _LABEL_TO_INDEX[out_ket]])


def ideal_cnot() -> CnotChannel:
    """Perfect control-on-qubit-1 gate as a single-unitary channel."""
    return CnotChannel(epsilon=1.0, kraus=(_cnot_matrix(),))


def imperfect_cnot(epsilon: float, residuals: np.ndarray | None = None) -> CnotChannel:
    """Quality-epsilon gate: sqrt(eps) * U_cnot plus basis-dephasing projectors.

    With residuals r[out, in] >= 0, extra jump operators sqrt(r)|out><in| move
    population off the ideal path; each input column's residual weight is
    clipped to at most 1 - epsilon so the map stays CPTP.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    u = _cnot_matrix()
    ks: list[np.ndarray] = [math.sqrt(epsilon) * u]
    if residuals is None:
        res = np.zeros((4, 4))
    else:
        res = np.asarray(residuals, dtype=float)
        if res.shape != (4, 4):
            raise DimensionError(f"residual matrix must be 4x4, got {res.shape}")
        if np.any(res < 0):
            raise ValueError("residual weights must be nonnegative")
        res = res.copy()
        col = res.sum(axis=0)
        for j in range(4):
            if col[j] > (1.0 - epsilon) and col[j] > 0:
                res[:, j] *= (1.0 - epsilon) / col[j]
    col = res.sum(axis=0)
    for j_label in range(4):
        j = _LABEL_TO_INDEX[j_label]
        weight = 1.0 - epsilon - col[j_label]
        if weight > 0:
            proj = np.zeros((4, 4), dtype=complex)
            proj[j, j] = math.sqrt(weight)
            ks.append(proj)
        for i_label in range(4):
            if res[i_label, j_label] > 0:
                jump = np.zeros((4, 4), dtype=complex)
                jump[_LABEL_TO_INDEX[i_label], j] = math.sqrt(res[i_label, j_label])
                ks.append(jump)
    return CnotChannel(epsilon=epsilon, kraus=tuple(ks), residuals=res)


def apply_channel(ch: CnotChannel, state: QuantumState) -> QuantumState:
    """Apply the two-qubit channel, acting as identity on any trailing factors."""
    if len(state.dims) < 2 or state.dims[0] != 2 or state.dims[1] != 2:
        raise DimensionError(f"state must start with two qubit factors, got dims {state.dims}")
    rest = int(np.prod(state.dims[2:], initial=1))
    eye = np.eye(rest, dtype=complex)
    rho = state.to_density().data
    out = np.zeros_like(rho)
    for k in ch.kraus:
        full = np.kron(k, eye)
        out += full @ rho @ full.conj().T
    return QuantumState(out, state.dims)


def iswap_cnot_time(coupler: CouplerParams) -> float:
    """Duration pi/(4 lambda) of one exchange segment in the CNOT construction."""
    return math.pi / (4.0 * coupler.lam)


def qubit_coupling_hamiltonian(lam: float) -> Operator:
    """Exchange coupling lambda (s1+ s2- + s1- s2+) on the two-qubit space."""
    h = np.zeros((4, 4), dtype=complex)
    h[1, 2] = lam  # |ge><eg|
    h[2, 1] = lam
    return Operator(h, (2, 2))


def choi_matrix(ch: CnotChannel) -> np.ndarray:
    """Choi representation sum_ij |i><j| (x) E(|i><j|); PSD iff the map is CP."""
    c = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            unit = np.zeros((4, 4), dtype=complex)
            unit[i, j] = 1.0
            out = sum(k @ unit @ k.conj().T for k in ch.kraus)
            c[i * 4 : (i + 1) * 4, j * 4 : (j + 1) * 4] = out
    return c
