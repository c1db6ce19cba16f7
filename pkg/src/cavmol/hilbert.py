"""Dense operator algebra on finite tensor-product Hilbert spaces.

Conventions used everywhere in the package: hbar = 1, frequencies in units
of the molecular transition frequency, basis ordering is molecular factors
first and the photon factor last, and within each two-level factor the
excited state comes before the ground state.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import DimensionMismatchError, NonHermitianError, StateError

HERMITIAN_ATOL = 1e-12
STATE_ATOL = 1e-10
EIGENVALUE_FLOOR = -1e-8


def _as_square_complex(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex operator over an ordered tensor product of subsystems.

    Parameters
    ----------
    entries
        Square complex matrix.
    subsystem_dims
        Dimensions of the tensor factors; their product must equal the
        matrix dimension.
    hermitian
        If set, the entries are checked to be hermitian within 1e-12.
    """

    entries: np.ndarray
    subsystem_dims: tuple[int, ...]
    hermitian: bool = False

    def __post_init__(self):
        m = _as_square_complex(self.entries)
        dims = tuple(int(d) for d in self.subsystem_dims)
        if any(d <= 0 for d in dims):
            raise DimensionMismatchError(f"subsystem dims must be positive, got {dims}")
        if prod(dims) != m.shape[0]:
            raise DimensionMismatchError(
                f"product of subsystem dims {dims} does not match dimension {m.shape[0]}"
            )
        if self.hermitian and np.max(np.abs(m - m.conj().T)) > HERMITIAN_ATOL:
            raise NonHermitianError("hermitian flag set on a non-hermitian matrix")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "subsystem_dims", dims)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def is_hermitian(self, atol: float = HERMITIAN_ATOL) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T)) <= atol)

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.subsystem_dims)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite state (within tolerances)."""

    op: OperatorMatrix

    def __post_init__(self):
        m = self.op.entries
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > STATE_ATOL:
            raise StateError(f"trace deviates from one by {abs(tr - 1.0):.3e}")
        if np.max(np.abs(m - m.conj().T)) > STATE_ATOL:
            raise StateError("density matrix is not hermitian within 1e-10")
        w_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if w_min < EIGENVALUE_FLOOR:
            raise StateError(f"negative eigenvalue {w_min:.3e} below tolerance")

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def subsystem_dims(self) -> tuple[int, ...]:
        return self.op.subsystem_dims

    @classmethod
    def from_entries(cls, entries, subsystem_dims) -> "DensityMatrix":
        return cls(OperatorMatrix(entries, subsystem_dims))

    @classmethod
    def pure(cls, vector, subsystem_dims) -> "DensityMatrix":
        """State |v><v| / <v|v> for a state vector v."""
        v = np.asarray(vector, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise StateError("cannot normalize the zero vector")
        v = v / nrm
        return cls(OperatorMatrix(np.outer(v, v.conj()), subsystem_dims))


def tensor(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """Kronecker product of two operators; subsystem dims concatenate."""
    return OperatorMatrix(np.kron(a.entries, b.entries), a.subsystem_dims + b.subsystem_dims)


def tensor_all(ops: list[OperatorMatrix]) -> OperatorMatrix:
    if not ops:
        raise DimensionMismatchError("tensor_all needs at least one operator")
    out = ops[0]
    for op in ops[1:]:
        out = tensor(out, op)
    return out


def identity(dims) -> OperatorMatrix:
    dims = tuple(int(d) for d in dims)
    return OperatorMatrix(np.eye(prod(dims), dtype=complex), dims)


def fock_annihilation(trunc: int) -> OperatorMatrix:
    """Annihilation operator on a Fock space truncated at level ``trunc``."""
    if trunc < 0:
        raise DimensionMismatchError("truncation must be non-negative")
    a = np.zeros((trunc + 1, trunc + 1), dtype=complex)
    for n in range(trunc):
        a[n, n + 1] = np.sqrt(n + 1.0)
    return OperatorMatrix(a, (trunc + 1,))


def partial_trace_last(rho: DensityMatrix, keep_dims) -> DensityMatrix:
    """Trace out the trailing tensor factor(s), keeping the leading ones.

    ``keep_dims`` must coincide with the leading subsystem dims of ``rho``;
    everything after them is traced out.
    """
    dims = rho.subsystem_dims
    keep = tuple(int(d) for d in keep_dims)
    if len(keep) == 0 or len(keep) >= len(dims) or dims[: len(keep)] != keep:
        raise DimensionMismatchError(
            f"keep_dims {keep} is not a proper leading split of {dims}"
        )
    d_keep = prod(keep)
    d_traced = rho.dim // d_keep
    m = rho.entries.reshape(d_keep, d_traced, d_keep, d_traced)
    reduced = np.einsum("ipjp->ij", m)
    return DensityMatrix(OperatorMatrix(reduced, keep))


def eigendecompose(h: OperatorMatrix) -> tuple[np.ndarray, OperatorMatrix]:
    """Spectral decomposition of a hermitian operator.

    Returns eigenvalues in ascending order and the unitary of column
    eigenvectors, so that ``h = V diag(w) V^dagger``.
    """
    if not h.is_hermitian(atol=1e-10):
        raise NonHermitianError("eigendecompose requires a hermitian operator")
    w, v = np.linalg.eigh(h.entries)
    return w, OperatorMatrix(v, h.subsystem_dims)


class SpectralPropagator:
    """Exact unitary stepper for a time-independent hermitian generator.

    The eigendecomposition is computed once; each step applies phase factors
    in the eigenbasis. This is the exact propagator U = exp(-i h dt) and
    preserves trace, hermiticity, and spectrum up to rounding.
    """

    def __init__(self, h: OperatorMatrix):
        self.eigenvalues, vec = eigendecompose(h)
        self._v = vec.entries
        self._dims = h.subsystem_dims

    def evolve_entries(self, rho: np.ndarray, dt: float) -> np.ndarray:
        ph = np.exp(-1j * self.eigenvalues * dt)
        rho_e = self._v.conj().T @ rho @ self._v
        rho_e = (ph[:, None] * rho_e) * ph.conj()[None, :]
        return self._v @ rho_e @ self._v.conj().T

    def evolve(self, state: DensityMatrix, dt: float) -> DensityMatrix:
        return DensityMatrix(OperatorMatrix(self.evolve_entries(state.entries, dt), self._dims))


_propagator_cache: dict[bytes, SpectralPropagator] = {}


def evolve_unitary(h: OperatorMatrix, dt: float, state: DensityMatrix) -> DensityMatrix:
    """One exact unitary step of the von Neumann equation under ``h``.

    The spectral decomposition is cached per Hamiltonian so that repeated
    stepping with the same generator costs O(dim^2) per step.
    """
    if h.dim != state.dim:
        raise DimensionMismatchError("Hamiltonian and state dimensions differ")
    key = h.entries.tobytes()
    prop = _propagator_cache.get(key)
    if prop is None:
        if len(_propagator_cache) > 16:
            _propagator_cache.clear()
        prop = SpectralPropagator(h)
        _propagator_cache[key] = prop
    return prop.evolve(state, dt)
