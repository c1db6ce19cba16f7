"""Model Hamiltonians: two-level emitters coupled to a single quantized cavity mode.

The counter-rotating coupling term is kept in full, and no dipole
self-energy term is included.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import ceil

import numpy as np

from .errors import ConfigError
from .hilbert import OperatorMatrix, fock_annihilation, identity, tensor

SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)  # basis (|e>, |g>)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


class ModelKind(str, Enum):
    RABI = "rabi"
    DICKE = "dicke"


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of the coupled emitter-cavity model (frequencies in omega0 units)."""

    kind: ModelKind
    omega_c: float
    g: float
    photon_trunc: int
    omega0: float = 1.0
    n_atoms: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.g < 0:
            raise ConfigError("g >= 0 is required")
        if self.omega_c <= 0:
            raise ConfigError("omega_c > 0 is required")
        if self.omega0 <= 0:
            raise ConfigError("omega0 > 0 is required")
        if self.photon_trunc < 0:
            raise ConfigError("photon_trunc >= 0 is required")
        if self.n_atoms < 1:
            raise ConfigError("n_atoms >= 1 is required")
        if self.kind is ModelKind.RABI and self.n_atoms != 1:
            raise ConfigError("the Rabi model has exactly one atom")

    @property
    def molecular_dims(self) -> tuple[int, ...]:
        return (2,) * self.n_atoms

    @property
    def molecular_dim(self) -> int:
        return 2**self.n_atoms

    @property
    def photon_dim(self) -> int:
        return self.photon_trunc + 1

    @property
    def dim(self) -> int:
        return self.molecular_dim * self.photon_dim


def default_photon_trunc(mean_n: float) -> int:
    """Default Fock cutoff for a light state with mean photon number ``mean_n``."""
    return max(20, ceil(4.0 * mean_n) + 20)


def site_operator(op2: np.ndarray, site: int, n_atoms: int) -> OperatorMatrix:
    """Embed a single two-level operator at position ``site`` (0-based)."""
    if not 0 <= site < n_atoms:
        raise ConfigError(f"site {site} outside 0..{n_atoms - 1}")
    factors = [
        OperatorMatrix(op2 if i == site else np.eye(2, dtype=complex), (2,))
        for i in range(n_atoms)
    ]
    out = factors[0]
    for f in factors[1:]:
        out = tensor(out, f)
    return out


def molecular_hamiltonian(spec: ModelSpec) -> OperatorMatrix:
    """H_S = (omega0/2) * sum_i sigma_z(i) on the molecular space."""
    h = np.zeros((spec.molecular_dim,) * 2, dtype=complex)
    for i in range(spec.n_atoms):
        h += site_operator(SIGMA_Z, i, spec.n_atoms).entries
    return OperatorMatrix(0.5 * spec.omega0 * h, spec.molecular_dims, hermitian=True)


def coupling_operator(spec: ModelSpec) -> OperatorMatrix:
    """Collective transition operator sum_i sigma_x(i) that couples to the field."""
    k = np.zeros((spec.molecular_dim,) * 2, dtype=complex)
    for i in range(spec.n_atoms):
        k += site_operator(SIGMA_X, i, spec.n_atoms).entries
    return OperatorMatrix(k, spec.molecular_dims, hermitian=True)


def full_hamiltonian(spec: ModelSpec) -> OperatorMatrix:
    """Emitters, cavity mode, and bilinear coupling on the product space.

    H = H_S ox 1 + omega_c 1 ox a^dag a + g K ox (a^dag + a), with the photon
    factor last.
    """
    a = fock_annihilation(spec.photon_trunc)
    ph_id = identity((spec.photon_dim,))
    n_op = OperatorMatrix(a.entries.conj().T @ a.entries, (spec.photon_dim,))
    x_op = OperatorMatrix(a.entries + a.entries.conj().T, (spec.photon_dim,))
    m_id = identity(spec.molecular_dims)

    h = (
        tensor(molecular_hamiltonian(spec), ph_id).entries
        + spec.omega_c * tensor(m_id, n_op).entries
        + spec.g * tensor(coupling_operator(spec), x_op).entries
    )
    return OperatorMatrix(h, spec.molecular_dims + (spec.photon_dim,), hermitian=True)


def parity_operator(spec: ModelSpec) -> OperatorMatrix:
    """Excitation parity sigma_z ox (-1)^(a^dag a), conserved by the Rabi model."""
    if spec.kind is not ModelKind.RABI:
        raise ConfigError("parity operator is defined for the Rabi model")
    ph = OperatorMatrix(
        np.diag([(-1.0 + 0j) ** n for n in range(spec.photon_dim)]), (spec.photon_dim,)
    )
    return tensor(OperatorMatrix(SIGMA_Z, (2,)), ph)
