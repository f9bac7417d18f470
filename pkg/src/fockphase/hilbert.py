"""Dense complex linear algebra over qubit (x) qubit (x) truncated-Fock spaces.

States live on a composite Hilbert space whose factors are listed left to
right as (qubit 1, qubit 2, Fock); single-qubit protocols use (qubit 1, Fock).
Qubit basis ordering is index 0 = |g>, index 1 = |e>, so sigma_z|e> = +|e>
and the excited state is the high-energy state.

Everything is dense: the composite dimensions in this package stay below a
few hundred, where dense BLAS beats any sparse bookkeeping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

GROUND = 0
EXCITED = 1

__all__ = [
    "GROUND",
    "EXCITED",
    "DimensionError",
    "FockSpace",
    "QuantumState",
    "Operator",
    "fock_state",
    "product_state",
    "ladder_ops",
    "number_op",
    "identity",
    "sigma_plus",
    "sigma_minus",
    "sigma_z",
    "tensor",
    "fidelity",
    "partial_trace",
    "trace_distance",
    "marginal_probability",
]


class DimensionError(ValueError):
    """Raised when operands do not live on compatible spaces."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockSpace:
    """Truncated single-mode Fock ladder with basis |0> ... |dim-1>."""

    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise DimensionError(f"Fock truncation must be >= 2, got {self.dim}")


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure ket or density matrix over a composite space.

    ``data`` is a 1-D array for kets and a 2-D array for density matrices;
    ``dims`` lists the subsystem dimensions in layout order.  Arrays are
    frozen at construction, so states are safe to share between threads.
    """

    data: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        d = int(np.prod(self.dims))
        arr = _frozen(self.data)
        if arr.ndim == 1:
            if arr.shape != (d,):
                raise DimensionError(f"ket length {arr.shape} != prod(dims) {d}")
        elif arr.ndim == 2:
            if arr.shape != (d, d):
                raise DimensionError(f"density matrix shape {arr.shape} != ({d},{d})")
        else:
            raise DimensionError("state must be a vector or a square matrix")
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))

    @property
    def is_ket(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @classmethod
    def ket(cls, vector, dims) -> "QuantumState":
        return cls(np.asarray(vector, dtype=complex), tuple(dims))

    @classmethod
    def density(cls, matrix, dims) -> "QuantumState":
        return cls(np.asarray(matrix, dtype=complex), tuple(dims))

    def to_density(self) -> "QuantumState":
        if self.is_ket:
            return QuantumState(np.outer(self.data, self.data.conj()), self.dims)
        return self

    def validate(self, norm_tol: float = 1e-10, psd_tol: float = 1e-9) -> None:
        """Check the declared state invariants, raising ValueError on failure."""
        if self.is_ket:
            n = np.linalg.norm(self.data)
            if abs(n - 1.0) > norm_tol:
                raise ValueError(f"ket norm deviates from 1 by {abs(n - 1.0):.3e}")
            return
        rho = self.data
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > norm_tol:
            raise ValueError(f"density matrix not Hermitian (max dev {herm:.3e})")
        tr = rho.trace().real
        if abs(tr - 1.0) > norm_tol:
            raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        evals = np.linalg.eigvalsh(rho)
        if evals.min() < -psd_tol:
            raise ValueError(f"density matrix not PSD (min eigenvalue {evals.min():.3e})")


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix tagged with the composite space it acts on."""

    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = int(np.prod(self.dims))
        if m.ndim != 2 or m.shape != (d, d):
            raise DimensionError(f"operator shape {m.shape} != ({d},{d}) from dims {self.dims}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.dims)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise DimensionError(f"dims mismatch: {self.dims} vs {other.dims}")
        return Operator(self.matrix @ other.matrix, self.dims)

    def apply(self, state: QuantumState) -> QuantumState:
        """Apply to a state: M|psi> for kets, M rho M^dag for density matrices."""
        if self.dims != state.dims:
            raise DimensionError(f"dims mismatch: {self.dims} vs {state.dims}")
        if state.is_ket:
            return QuantumState(self.matrix @ state.data, state.dims)
        m = self.matrix
        return QuantumState(m @ state.data @ m.conj().T, state.dims)


def fock_state(n: int, dim: int) -> QuantumState:
    """Basis ket |n> in a dim-dimensional ladder (works for qubits with dim=2)."""
    if not 0 <= n < dim:
        raise DimensionError(f"level {n} outside truncation 0..{dim - 1}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return QuantumState(v, (dim,))


def product_state(*factors: QuantumState) -> QuantumState:
    """Tensor product of kets, in the given layout order."""
    vec = factors[0].data
    dims: tuple[int, ...] = factors[0].dims
    for f in factors[1:]:
        if not f.is_ket:
            raise DimensionError("product_state expects kets")
        vec = np.kron(vec, f.data)
        dims = dims + f.dims
    return QuantumState(vec, dims)


def ladder_ops(dim: int) -> tuple[Operator, Operator]:
    """Truncated annihilation/creation pair (a, a_dag) with a|n> = sqrt(n)|n-1>."""
    if dim < 2:
        raise DimensionError(f"need dim >= 2 for ladder operators, got {dim}")
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return Operator(a, (dim,)), Operator(a.conj().T, (dim,))


def number_op(dim: int) -> Operator:
    return Operator(np.diag(np.arange(dim, dtype=complex)), (dim,))


def identity(dims: Sequence[int] | int) -> Operator:
    dims = (dims,) if isinstance(dims, int) else tuple(dims)
    return Operator(np.eye(int(np.prod(dims)), dtype=complex), dims)


def sigma_plus() -> np.ndarray:
    """|e><g| in the (g, e) ordering."""
    return np.array([[0, 0], [1, 0]], dtype=complex)


def sigma_minus() -> np.ndarray:
    return np.array([[0, 1], [0, 0]], dtype=complex)


def sigma_z() -> np.ndarray:
    """Population operator with sigma_z|e> = +|e>."""
    return np.diag([-1.0 + 0j, 1.0 + 0j])


def tensor(ops: Sequence[Operator]) -> Operator:
    """Kronecker product of >= 2 operators, in layout order."""
    if len(ops) < 2:
        raise DimensionError("tensor product needs at least two factors")
    m = ops[0].matrix
    dims: tuple[int, ...] = ops[0].dims
    for op in ops[1:]:
        m = np.kron(m, op.matrix)
        dims = dims + op.dims
    return Operator(m, dims)


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    # Hermitian square root via eigh; tiny negative eigenvalues are clipped.
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(s1: QuantumState, s2: QuantumState) -> float:
    """State fidelity in [0, 1]; |<a|b>|^2 for kets, Uhlmann for mixed states."""
    if s1.dims != s2.dims:
        raise DimensionError(f"dims mismatch: {s1.dims} vs {s2.dims}")
    if s1.is_ket and s2.is_ket:
        return float(abs(np.vdot(s1.data, s2.data)) ** 2)
    if s1.is_ket:
        return float(np.real(np.vdot(s1.data, s2.to_density().data @ s1.data)))
    if s2.is_ket:
        return float(np.real(np.vdot(s2.data, s1.data @ s2.data)))
    root = _sqrtm_psd(s1.data)
    inner = _sqrtm_psd(root @ s2.data @ root)
    val = float(np.real(inner.trace())) ** 2
    return min(max(val, 0.0), 1.0 + 1e-12)


def partial_trace(state: QuantumState, keep: Iterable[int]) -> QuantumState:
    """Reduced density matrix over the kept subsystems (indices in layout order)."""
    keep = sorted(set(int(k) for k in keep))
    n = len(state.dims)
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"subsystem index outside 0..{n - 1}: {keep}")
    rho = state.to_density().data.reshape(state.dims + state.dims)
    # Contract traced-out row/column index pairs one at a time.
    traced = [i for i in range(n) if i not in keep]
    for offset, i in enumerate(traced):
        ax = i - offset  # axes shift as we consume them
        k = rho.ndim // 2
        rho = np.trace(rho, axis1=ax, axis2=ax + k)
    kept_dims = tuple(state.dims[k] for k in keep)
    d = int(np.prod(kept_dims))
    return QuantumState(rho.reshape(d, d), kept_dims)


def trace_distance(s1: QuantumState, s2: QuantumState) -> float:
    """(1/2) tr|rho - sigma|."""
    if s1.dims != s2.dims:
        raise DimensionError(f"dims mismatch: {s1.dims} vs {s2.dims}")
    diff = s1.to_density().data - s2.to_density().data
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def marginal_probability(state: QuantumState, subsystem: int, level: int) -> float:
    """Population of |level> in one subsystem, tracing out everything else."""
    reduced = partial_trace(state, [subsystem])
    return float(np.real(reduced.data[level, level]))
