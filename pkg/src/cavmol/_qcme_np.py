"""Reference integrators for the time-nonlocal reduced master equation.

Two interchangeable engines live here. ``qcme_loop_separable`` exploits the
separable form of the memory kernels, cov(t, t') = sum_a f_a(t) h_a(t'),
and keeps running trapezoid sums so that each step costs O(d^2). It is the
pure-numpy twin of the compiled loop in ``_qcme_cy``; both evaluate the same
quadrature and are interchangeable up to rounding. ``qcme_loop_history``
keeps the full commutator history and re-contracts it against kernel rows
every step, so it works for arbitrary kernels and serves as the
independent O(n_steps^2) cross-check.

Both integrate, in the interaction picture of the diagonal molecular
Hamiltonian with eigenvalues ``energies``,

    d rho / dt = -i m(t) [K(t), rho(t)]
                 - int_0^t dt' cov(t, t') [K(t), [K(t'), rho(t')]]
                 - (i/2) int_0^t dt' chi(t, t') [K(t), {K(t'), rho(t')}]

with K(t) = e^{i H_S t} K e^{-i H_S t}. The memory integrals use trapezoid
quadrature on the step grid; stepping is a second-order predictor-corrector
(an Euler predictor closed by one trapezoid correction).
"""

from __future__ import annotations

import numpy as np

from .errors import TraceDriftError

TRACE_CHECK_EVERY = 256


def _k_interaction(K: np.ndarray, energies: np.ndarray, t: float) -> np.ndarray:
    u = np.exp(1j * energies * t)
    return (u[:, None] * K) * u.conj()[None, :]


def _check_trace(rho: np.ndarray, step: int, tol: float) -> None:
    drift = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    # the comparison is written to also trip on NaN from a blown-up run
    if not drift <= tol:
        raise TraceDriftError(f"trace drifted by {drift:.3e} at step {step}")


def qcme_loop_separable(
    rho0: np.ndarray,
    energies: np.ndarray,
    K: np.ndarray,
    mean_arr: np.ndarray,
    cov_f: np.ndarray,
    cov_g: np.ndarray,
    chi_f: np.ndarray,
    chi_g: np.ndarray,
    dt: float,
    order: int,
    out_idx: np.ndarray,
    trace_tol: float,
) -> np.ndarray:
    """Propagate with separable kernels; returns interaction-picture states.

    ``mean_arr`` has one entry per grid point; ``cov_f``/``cov_g`` hold the
    factor functions of the covariance kernel evaluated on the grid, one row
    per separable component (``chi_f``/``chi_g`` likewise). ``out_idx`` lists
    the grid indices to record.
    """
    n = mean_arr.shape[0] - 1
    d = rho0.shape[0]
    mc = cov_f.shape[0] if order == 2 else 0
    mx = chi_f.shape[0] if order == 2 else 0

    rho = rho0.astype(complex).copy()
    s_cov = np.zeros((mc, d, d), dtype=complex)
    s_chi = np.zeros((mx, d, d), dtype=complex)

    out = np.empty((len(out_idx), d, d), dtype=complex)
    out_pos = 0
    if out_idx[0] == 0:
        out[0] = rho
        out_pos = 1

    k_t = _k_interaction(K, energies, 0.0)
    b_last = k_t @ rho - rho @ k_t
    a_last = k_t @ rho + rho @ k_t

    half = 0.5 * dt
    for k in range(n):
        # right-hand side at t_k with the closed history
        if mc or mx:
            g_mat = np.tensordot(cov_f[:, k], s_cov, axes=(0, 0)) + 0.5j * np.tensordot(
                chi_f[:, k], s_chi, axes=(0, 0)
            )
            f_k = -1j * mean_arr[k] * b_last - (k_t @ g_mat - g_mat @ k_t)
        else:
            f_k = -1j * mean_arr[k] * b_last

        rho_p = rho + dt * f_k
        k_t1 = _k_interaction(K, energies, (k + 1) * dt)
        p = k_t1 @ rho_p
        m = rho_p @ k_t1
        b_pred = p - m
        a_pred = p + m

        if mc or mx:
            s_cov_p = s_cov + half * (
                cov_g[:, k, None, None] * b_last + cov_g[:, k + 1, None, None] * b_pred
            )
            s_chi_p = s_chi + half * (
                chi_g[:, k, None, None] * a_last + chi_g[:, k + 1, None, None] * a_pred
            )
            g_mat = np.tensordot(cov_f[:, k + 1], s_cov_p, axes=(0, 0)) + 0.5j * np.tensordot(
                chi_f[:, k + 1], s_chi_p, axes=(0, 0)
            )
            f_k1 = -1j * mean_arr[k + 1] * b_pred - (k_t1 @ g_mat - g_mat @ k_t1)
        else:
            f_k1 = -1j * mean_arr[k + 1] * b_pred

        rho = rho + half * (f_k + f_k1)

        # close the trapezoid sums with the corrected state
        p = k_t1 @ rho
        m = rho @ k_t1
        b_new = p - m
        a_new = p + m
        if mc or mx:
            s_cov += half * (
                cov_g[:, k, None, None] * b_last + cov_g[:, k + 1, None, None] * b_new
            )
            s_chi += half * (
                chi_g[:, k, None, None] * a_last + chi_g[:, k + 1, None, None] * a_new
            )
        b_last, a_last, k_t = b_new, a_new, k_t1

        if (k + 1) % TRACE_CHECK_EVERY == 0 or k + 1 == n:
            _check_trace(rho, k + 1, trace_tol)
        if out_pos < len(out_idx) and out_idx[out_pos] == k + 1:
            out[out_pos] = rho
            out_pos += 1

    return out


def qcme_loop_history(
    rho0: np.ndarray,
    energies: np.ndarray,
    K: np.ndarray,
    times: np.ndarray,
    mean_fn,
    cov_fn,
    chi_fn,
    dt: float,
    order: int,
    out_idx: np.ndarray,
    trace_tol: float,
) -> np.ndarray:
    """Propagate with arbitrary kernel callables via explicit history storage.

    ``cov_fn(t, tp)`` and ``chi_fn(t, tp)`` must broadcast over the array of
    past times ``tp``. Cost is O(n_steps^2 d^2); intended for cross-checks
    and moderate windows.
    """
    n = times.shape[0] - 1
    d = rho0.shape[0]
    memory = order == 2

    rho = rho0.astype(complex).copy()
    hist_b = np.empty((n + 1, d, d), dtype=complex)
    hist_a = np.empty((n + 1, d, d), dtype=complex)

    out = np.empty((len(out_idx), d, d), dtype=complex)
    out_pos = 0
    if out_idx[0] == 0:
        out[0] = rho
        out_pos = 1

    def weights(npts: int) -> np.ndarray:
        if npts == 1:
            return np.zeros(1)
        w = np.full(npts, dt)
        w[0] = w[-1] = 0.5 * dt
        return w

    def rhs(idx: int, rho_t: np.ndarray, k_mat: np.ndarray, b_t: np.ndarray) -> np.ndarray:
        t = times[idx]
        f = -1j * float(mean_fn(t)) * b_t
        if memory and idx > 0:
            w = weights(idx + 1)
            past = times[: idx + 1]
            g_mat = np.tensordot(w * cov_fn(t, past), hist_b[: idx + 1], axes=(0, 0))
            g_mat = g_mat + 0.5j * np.tensordot(
                w * chi_fn(t, past), hist_a[: idx + 1], axes=(0, 0)
            )
            f = f - (k_mat @ g_mat - g_mat @ k_mat)
        return f

    k_t = _k_interaction(K, energies, times[0])
    for k in range(n):
        p = k_t @ rho
        m = rho @ k_t
        hist_b[k] = p - m
        hist_a[k] = p + m
        f_k = rhs(k, rho, k_t, hist_b[k])

        rho_p = rho + dt * f_k
        k_t1 = _k_interaction(K, energies, times[k + 1])
        p = k_t1 @ rho_p
        m = rho_p @ k_t1
        hist_b[k + 1] = p - m
        hist_a[k + 1] = p + m
        f_k1 = rhs(k + 1, rho_p, k_t1, hist_b[k + 1])

        rho = rho + 0.5 * dt * (f_k + f_k1)
        # the stored history must hold the corrected state
        p = k_t1 @ rho
        m = rho @ k_t1
        hist_b[k + 1] = p - m
        hist_a[k + 1] = p + m
        k_t = k_t1

        if (k + 1) % TRACE_CHECK_EVERY == 0 or k + 1 == n:
            _check_trace(rho, k + 1, trace_tol)
        if out_pos < len(out_idx) and out_idx[out_pos] == k + 1:
            out[out_pos] = rho
            out_pos += 1

    return out
