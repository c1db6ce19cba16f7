"""Statistics of the cavity field states that drive the molecular dynamics.

Three pure photon states are supported: a Fock state, a real superposition
of two adjacent Fock states, and a squeezed vacuum with zero squeezing
phase. For each state the module provides the mean field, the symmetrized
and antisymmetrized two-time kernels, and the response kernel in closed
form, plus a brute-force truncated-Fock-space evaluation of the same
quantities that serves as an independent cross-check.

The field observable in the interaction picture is
``Phi(t) = g (a^dag e^{i w_c t} + a e^{-i w_c t})`` with hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.linalg import expm

from .errors import InsufficientTruncationError, StateError
from .hilbert import fock_annihilation
from .models import default_photon_trunc

NORM_ATOL = 1e-12
# Captured-weight bound used to accept a truncated squeezed-vacuum build.
SQUEEZED_TAIL_TOL = 1e-5
_SQUEEZED_PAD = 24


@dataclass(frozen=True)
class Fock:
    """Photon-number eigenstate |n>."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise StateError("Fock occupation must be non-negative")


@dataclass(frozen=True)
class FockSuperposition:
    """Real-amplitude superposition c_n |n> + c_np1 |n+1>."""

    n: int
    c_n: float
    c_np1: float

    def __post_init__(self):
        if self.n < 0:
            raise StateError("Fock occupation must be non-negative")
        if abs(self.c_n**2 + self.c_np1**2 - 1.0) > NORM_ATOL:
            raise StateError("superposition amplitudes must satisfy c_n^2 + c_np1^2 = 1")
        if self.c_n < 0 or self.c_np1 < 0:
            raise StateError("superposition amplitudes are restricted to non-negative reals")


@dataclass(frozen=True)
class SqueezedVacuum:
    """Squeezed vacuum with real squeezing parameter r (phase fixed to zero)."""

    r: float

    def __post_init__(self):
        if self.r < 0:
            raise StateError("squeezing parameter r must be non-negative")


LightState = Union[Fock, FockSuperposition, SqueezedVacuum]


def mean_photon_number(state: LightState) -> float:
    if isinstance(state, Fock):
        return float(state.n)
    if isinstance(state, FockSuperposition):
        return state.n + state.c_np1**2
    return float(np.sinh(state.r) ** 2)


def highest_fock_index(state: LightState) -> int | None:
    """Largest occupied Fock level, or None when the support is unbounded."""
    if isinstance(state, Fock):
        return state.n
    if isinstance(state, FockSuperposition):
        return state.n + 1
    return None


def required_photon_trunc(state: LightState) -> int:
    """Cutoff that holds the state: the mean-photon default, deepened when
    the squeezed-vacuum tail would otherwise exceed 1e-8 of the weight."""
    base = default_photon_trunc(mean_photon_number(state))
    if not isinstance(state, SqueezedVacuum) or state.r == 0.0:
        return base
    reference = _squeezed_amplitudes(state.r, 4 * base + 80)
    captured = np.cumsum(np.abs(reference) ** 2)
    needed = int(np.searchsorted(captured, 1.0 - 1e-8))
    return max(base, needed)


def mean_field(state: LightState, g: float, omega_c: float, t):
    """Expectation value of the field observable at time t."""
    t = np.asarray(t, dtype=float)
    if isinstance(state, FockSuperposition):
        amp = 2.0 * g * np.sqrt(state.n + 1.0) * state.c_n * state.c_np1
        return amp * np.cos(omega_c * t)
    return np.zeros_like(t) if t.ndim else 0.0


def sym_corr(state: LightState, g: float, omega_c: float, t, t_p):
    """Symmetrized two-time correlation of the field observable."""
    t = np.asarray(t, dtype=float)
    t_p = np.asarray(t_p, dtype=float)
    tau = omega_c * (t - t_p)
    if isinstance(state, Fock):
        return g**2 * (2.0 * state.n + 1.0) * np.cos(tau)
    if isinstance(state, FockSuperposition):
        weight = state.c_n**2 * (2.0 * state.n + 1.0) + state.c_np1**2 * (2.0 * state.n + 3.0)
        return g**2 * weight * np.cos(tau)
    r = state.r
    return g**2 * (
        (2.0 * np.sinh(r) ** 2 + 1.0) * np.cos(tau)
        - 2.0 * np.cosh(r) * np.sinh(r) * np.cos(omega_c * (t + t_p))
    )


def antisym_corr(g: float, omega_c: float, t, t_p):
    """Antisymmetrized two-time correlation; fixed by [a, a^dag] = 1 for every state."""
    t = np.asarray(t, dtype=float)
    t_p = np.asarray(t_p, dtype=float)
    return -(g**2) * np.sin(omega_c * (t - t_p))


def response_kernel(g: float, omega_c: float, t, t_p):
    """Linear response kernel, the quantum limit 2*A(t, t') of the Poisson bracket."""
    return 2.0 * antisym_corr(g, omega_c, t, t_p)


def covariance_kernel(state: LightState, g: float, omega_c: float, t, t_p):
    """Centered kernel C(t, t') - <Phi(t)><Phi(t')> entering the master equation."""
    return sym_corr(state, g, omega_c, t, t_p) - mean_field(state, g, omega_c, t) * mean_field(
        state, g, omega_c, t_p
    )


KernelComponent = tuple[Callable, Callable]


@dataclass(frozen=True)
class FieldKernels:
    """Field statistics bundle consumed by the master-equation propagator.

    ``cov_components`` and ``chi_components`` optionally express the kernels
    as sums of products f(t) * h(t'), which enables the O(n_steps) memory
    integration path. All callables accept numpy arrays.
    """

    mean: Callable
    cov: Callable
    chi: Callable
    cov_components: tuple[KernelComponent, ...] | None = None
    chi_components: tuple[KernelComponent, ...] | None = None

    @classmethod
    def zero(cls) -> "FieldKernels":
        z1 = lambda t: np.zeros_like(np.asarray(t, dtype=float))
        z2 = lambda t, tp: np.zeros(np.broadcast(np.asarray(t), np.asarray(tp)).shape)
        return cls(mean=z1, cov=z2, chi=z2, cov_components=(), chi_components=())


def _cos_at(w: float, scale: float = 1.0) -> Callable:
    return lambda t, w=w, s=scale: s * np.cos(w * np.asarray(t, dtype=float))


def _sin_at(w: float, scale: float = 1.0) -> Callable:
    return lambda t, w=w, s=scale: s * np.sin(w * np.asarray(t, dtype=float))


def field_kernels(state: LightState, g: float, omega_c: float) -> FieldKernels:
    """Kernels of ``state`` with their separable trigonometric decomposition.

    Every supported state has cov(t, t') = A_cc cos(w t) cos(w t') +
    A_ss sin(w t) sin(w t'), and the response kernel is
    chi(t, t') = -2 g^2 sin(w (t - t')).
    """
    if isinstance(state, Fock):
        a_cc = a_ss = g**2 * (2.0 * state.n + 1.0)
    elif isinstance(state, FockSuperposition):
        base = g**2 * (
            state.c_n**2 * (2.0 * state.n + 1.0) + state.c_np1**2 * (2.0 * state.n + 3.0)
        )
        m_amp = 2.0 * g * np.sqrt(state.n + 1.0) * state.c_n * state.c_np1
        a_cc = base - m_amp**2
        a_ss = base
    else:
        a_cc = g**2 * np.exp(-2.0 * state.r)
        a_ss = g**2 * np.exp(2.0 * state.r)

    cov_components = (
        (_cos_at(omega_c, a_cc), _cos_at(omega_c)),
        (_sin_at(omega_c, a_ss), _sin_at(omega_c)),
    )
    chi_components = (
        (_sin_at(omega_c, -2.0 * g**2), _cos_at(omega_c)),
        (_cos_at(omega_c, 2.0 * g**2), _sin_at(omega_c)),
    )
    return FieldKernels(
        mean=lambda t: mean_field(state, g, omega_c, t),
        cov=lambda t, tp: covariance_kernel(state, g, omega_c, t, tp),
        chi=lambda t, tp: response_kernel(g, omega_c, t, tp),
        cov_components=cov_components,
        chi_components=chi_components,
    )


@lru_cache(maxsize=64)
def _squeezed_amplitudes(r: float, trunc: int) -> np.ndarray:
    """exp[(r/2)(a^2 - a^dag^2)] |0> evaluated in the truncated space."""
    a = fock_annihilation(trunc).entries
    gen = 0.5 * r * (a @ a - a.conj().T @ a.conj().T)
    vac = np.zeros(trunc + 1, dtype=complex)
    vac[0] = 1.0
    # gen is antihermitian, so the truncated exponential is exactly unitary
    out = expm(gen) @ vac
    out.flags.writeable = False
    return out


def state_vector(state: LightState, trunc: int) -> np.ndarray:
    """Normalized Fock amplitudes of ``state`` on a space truncated at ``trunc``.

    Raises InsufficientTruncationError when the cutoff cannot represent the
    state: finite-support states must fit entirely, and the squeezed vacuum
    must leave at most SQUEEZED_TAIL_TOL of its weight above the cutoff
    (measured against a padded reference build).
    """
    if trunc < 0:
        raise InsufficientTruncationError("truncation must be non-negative")
    dim = trunc + 1
    if isinstance(state, Fock):
        if state.n > trunc:
            raise InsufficientTruncationError(f"Fock |{state.n}> needs trunc >= {state.n}")
        v = np.zeros(dim, dtype=complex)
        v[state.n] = 1.0
        return v
    if isinstance(state, FockSuperposition):
        if state.n + 1 > trunc:
            raise InsufficientTruncationError(
                f"superposition on |{state.n}>, |{state.n + 1}> needs trunc >= {state.n + 1}"
            )
        v = np.zeros(dim, dtype=complex)
        v[state.n] = state.c_n
        v[state.n + 1] = state.c_np1
        return v

    reference = _squeezed_amplitudes(state.r, trunc + _SQUEEZED_PAD)
    captured = float(np.sum(np.abs(reference[:dim]) ** 2))
    if captured < 1.0 - SQUEEZED_TAIL_TOL:
        raise InsufficientTruncationError(
            f"squeezed vacuum r={state.r} keeps only {captured:.12f} of its weight "
            f"below trunc={trunc}"
        )
    return _squeezed_amplitudes(state.r, trunc).copy()


def corr_oracle(
    state: LightState, g: float, omega_c: float, trunc: int, t: float, t_p: float
) -> tuple[float, float, float]:
    """Field statistics evaluated directly in the truncated Fock space.

    Builds Phi(t) as a matrix and returns the symmetrized correlation,
    the antisymmetrized correlation, and the mean field at ``t``. This is
    deliberately independent of the closed forms above.
    """
    n_top = highest_fock_index(state)
    if n_top is not None and trunc < n_top + 10:
        raise InsufficientTruncationError(
            f"oracle needs a buffer of 10 levels above |{n_top}>, got trunc={trunc}"
        )
    psi = state_vector(state, trunc)
    a = fock_annihilation(trunc).entries
    ad = a.conj().T

    def phi(time: float) -> np.ndarray:
        return g * (ad * np.exp(1j * omega_c * time) + a * np.exp(-1j * omega_c * time))

    p_t = phi(t)
    p_tp = phi(t_p)
    sym = 0.5 * (psi.conj() @ (p_t @ (p_tp @ psi) + p_tp @ (p_t @ psi)))
    anti = (psi.conj() @ (p_t @ (p_tp @ psi) - p_tp @ (p_t @ psi))) / 2j
    mean_t = psi.conj() @ (p_t @ psi)
    return float(sym.real), float(anti.real), float(mean_t.real)


def _moments(state: LightState, trunc: int | None) -> tuple[np.ndarray, np.ndarray]:
    if trunc is None:
        base = highest_fock_index(state)
        trunc = base + 10 if base is not None else max(40, int(8 * mean_photon_number(state)) + 40)
    psi = state_vector(state, trunc)
    return psi, fock_annihilation(trunc).entries


def mandel_parameter(state: LightState, trunc: int | None = None) -> float:
    """Q = (var(n) - <n>) / <n>; negative values flag sub-Poissonian statistics."""
    psi, a = _moments(state, trunc)
    n_diag = np.arange(psi.size)
    p = np.abs(psi) ** 2
    n_mean = float(p @ n_diag)
    if n_mean == 0:
        raise StateError("Mandel parameter undefined for the vacuum")
    n_var = float(p @ n_diag**2) - n_mean**2
    return (n_var - n_mean) / n_mean


def quadrature_squeezing(state: LightState, trunc: int | None = None) -> float:
    """<X^2> - 1/2 for X = (a + a^dag)/sqrt(2); negative when squeezed."""
    psi, a = _moments(state, trunc)
    x = (a + a.conj().T) / np.sqrt(2.0)
    return float((psi.conj() @ (x @ (x @ psi))).real - 0.5)
