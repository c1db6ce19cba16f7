# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loop of the separable-kernel master-equation integrator.

Semantics are identical to ``_qcme_np.qcme_loop_separable``; the module is
selected at import time by ``cavmol._backend`` when the extension built.
"""

import numpy as np

from .errors import TraceDriftError

from libc.math cimport cos, sin, fabs
from libc.string cimport memcpy, memset
from scipy.linalg.cython_blas cimport zgemm

# fixed work-buffer bound; molecular spaces here are at most 2^4 = 16
cdef int MAX_DIM = 32


cdef inline double complex _conj(double complex z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline void _mm(double complex* a, double complex* b, double complex* c, int d) noexcept nogil:
    # row-major c = a @ b via column-major zgemm on the transposed layout
    cdef double complex one = 1.0
    cdef double complex zero = 0.0
    zgemm("N", "N", &d, &d, &d, &one, b, &d, a, &d, &zero, c, &d)


cdef inline void _scale_add(double complex* out, double complex* x, double complex s, int nn) noexcept nogil:
    cdef int i
    for i in range(nn):
        out[i] = out[i] + s * x[i]


cdef inline void _build_kt(double complex* kt, const double complex* k_mat, const double* e, double t, int d) noexcept nogil:
    cdef double complex u[32]
    cdef double ph
    cdef int a, b
    for a in range(d):
        ph = e[a] * t
        u[a] = cos(ph) + 1j * sin(ph)
    for a in range(d):
        for b in range(d):
            kt[a * d + b] = u[a] * k_mat[a * d + b] * _conj(u[b])


def qcme_loop_separable(
    rho0,
    energies,
    K,
    mean_arr,
    cov_f,
    cov_g,
    chi_f,
    chi_g,
    double dt,
    int order,
    out_idx,
    double trace_tol,
):
    """Drop-in compiled replacement for the numpy separable loop."""
    cdef const double complex[:, ::1] rho0_v = np.ascontiguousarray(rho0, dtype=complex)
    cdef const double[::1] e_v = np.ascontiguousarray(energies, dtype=float)
    cdef const double complex[:, ::1] k_v = np.ascontiguousarray(K, dtype=complex)
    cdef const double[::1] mean_v = np.ascontiguousarray(mean_arr, dtype=float)
    cdef const double[:, ::1] cov_f_v = np.ascontiguousarray(cov_f, dtype=float)
    cdef const double[:, ::1] cov_g_v = np.ascontiguousarray(cov_g, dtype=float)
    cdef const double[:, ::1] chi_f_v = np.ascontiguousarray(chi_f, dtype=float)
    cdef const double[:, ::1] chi_g_v = np.ascontiguousarray(chi_g, dtype=float)
    cdef const Py_ssize_t[::1] idx_v = np.ascontiguousarray(out_idx, dtype=np.intp)

    cdef int n = mean_v.shape[0] - 1
    cdef int d = rho0_v.shape[0]
    cdef int nn = d * d
    cdef int mc = cov_f_v.shape[0] if order == 2 else 0
    cdef int mx = chi_f_v.shape[0] if order == 2 else 0
    cdef bint have_mem = mc > 0 or mx > 0
    if d > MAX_DIM:
        raise ValueError(f"compiled loop supports dim <= {MAX_DIM}, got {d}")

    out_np = np.empty((idx_v.shape[0], d, d), dtype=complex)
    cdef double complex[:, :, ::1] out = out_np
    work_np = np.zeros((12, d, d), dtype=complex)
    cdef double complex[:, :, ::1] work = work_np
    s_cov_np = np.zeros((max(mc, 1), d, d), dtype=complex)
    s_chi_np = np.zeros((max(mx, 1), d, d), dtype=complex)
    cdef double complex[:, :, ::1] s_cov = s_cov_np
    cdef double complex[:, :, ::1] s_chi = s_chi_np

    cdef double complex* rho = &work[0, 0, 0]
    cdef double complex* rho_p = &work[1, 0, 0]
    cdef double complex* kt = &work[2, 0, 0]
    cdef double complex* kt1 = &work[3, 0, 0]
    cdef double complex* b_last = &work[4, 0, 0]
    cdef double complex* a_last = &work[5, 0, 0]
    cdef double complex* b_new = &work[6, 0, 0]
    cdef double complex* a_new = &work[7, 0, 0]
    cdef double complex* g_buf = &work[8, 0, 0]
    cdef double complex* t1 = &work[9, 0, 0]
    cdef double complex* t2 = &work[10, 0, 0]
    cdef double complex* f1 = &work[11, 0, 0]

    cdef double half = 0.5 * dt
    cdef double complex coef, tr, f2i
    cdef double drift
    cdef int k, i, a, b
    cdef Py_ssize_t out_pos = 0, n_out = idx_v.shape[0]
    cdef long fail_step = -1
    cdef double fail_drift = 0.0

    memcpy(rho, &rho0_v[0, 0], nn * sizeof(double complex))
    if n_out > 0 and idx_v[0] == 0:
        memcpy(&out[0, 0, 0], rho, nn * sizeof(double complex))
        out_pos = 1

    with nogil:
        _build_kt(kt, &k_v[0, 0], &e_v[0], 0.0, d)
        _mm(kt, rho, t1, d)
        _mm(rho, kt, t2, d)
        for i in range(nn):
            b_last[i] = t1[i] - t2[i]
            a_last[i] = t1[i] + t2[i]

        for k in range(n):
            # rhs at t_k against the closed memory sums
            if have_mem:
                memset(g_buf, 0, nn * sizeof(double complex))
                for a in range(mc):
                    _scale_add(g_buf, &s_cov[a, 0, 0], cov_f_v[a, k] + 0j, nn)
                for b in range(mx):
                    _scale_add(g_buf, &s_chi[b, 0, 0], 0.5j * chi_f_v[b, k], nn)
                _mm(kt, g_buf, t1, d)
                _mm(g_buf, kt, t2, d)
                for i in range(nn):
                    f1[i] = -1j * mean_v[k] * b_last[i] - (t1[i] - t2[i])
            else:
                for i in range(nn):
                    f1[i] = -1j * mean_v[k] * b_last[i]

            for i in range(nn):
                rho_p[i] = rho[i] + dt * f1[i]
            _build_kt(kt1, &k_v[0, 0], &e_v[0], (k + 1) * dt, d)
            _mm(kt1, rho_p, t1, d)
            _mm(rho_p, kt1, t2, d)
            for i in range(nn):
                b_new[i] = t1[i] - t2[i]
                a_new[i] = t1[i] + t2[i]

            # corrector rhs at t_{k+1} with the provisionally extended sums
            if have_mem:
                memset(g_buf, 0, nn * sizeof(double complex))
                for a in range(mc):
                    coef = cov_f_v[a, k + 1] + 0j
                    _scale_add(g_buf, &s_cov[a, 0, 0], coef, nn)
                    _scale_add(g_buf, b_last, coef * (half * cov_g_v[a, k]), nn)
                    _scale_add(g_buf, b_new, coef * (half * cov_g_v[a, k + 1]), nn)
                for b in range(mx):
                    coef = 0.5j * chi_f_v[b, k + 1]
                    _scale_add(g_buf, &s_chi[b, 0, 0], coef, nn)
                    _scale_add(g_buf, a_last, coef * (half * chi_g_v[b, k]), nn)
                    _scale_add(g_buf, a_new, coef * (half * chi_g_v[b, k + 1]), nn)
                _mm(kt1, g_buf, t1, d)
                _mm(g_buf, kt1, t2, d)
                for i in range(nn):
                    f2i = -1j * mean_v[k + 1] * b_new[i] - (t1[i] - t2[i])
                    rho[i] = rho[i] + half * (f1[i] + f2i)
            else:
                for i in range(nn):
                    f2i = -1j * mean_v[k + 1] * b_new[i]
                    rho[i] = rho[i] + half * (f1[i] + f2i)

            # close the trapezoid sums with the corrected state
            _mm(kt1, rho, t1, d)
            _mm(rho, kt1, t2, d)
            for i in range(nn):
                b_new[i] = t1[i] - t2[i]
                a_new[i] = t1[i] + t2[i]
            if have_mem:
                for a in range(mc):
                    _scale_add(&s_cov[a, 0, 0], b_last, half * cov_g_v[a, k] + 0j, nn)
                    _scale_add(&s_cov[a, 0, 0], b_new, half * cov_g_v[a, k + 1] + 0j, nn)
                for b in range(mx):
                    _scale_add(&s_chi[b, 0, 0], a_last, half * chi_g_v[b, k] + 0j, nn)
                    _scale_add(&s_chi[b, 0, 0], a_new, half * chi_g_v[b, k + 1] + 0j, nn)
            memcpy(b_last, b_new, nn * sizeof(double complex))
            memcpy(a_last, a_new, nn * sizeof(double complex))
            memcpy(kt, kt1, nn * sizeof(double complex))

            if (k + 1) % 256 == 0 or k + 1 == n:
                tr = 0
                for i in range(d):
                    tr = tr + rho[i * d + i]
                drift = fabs(tr.real - 1.0) + fabs(tr.imag)
                # also trips on NaN from a blown-up run
                if not drift <= trace_tol:
                    fail_step = k + 1
                    fail_drift = drift
                    break

            if out_pos < n_out and idx_v[out_pos] == k + 1:
                memcpy(&out[out_pos, 0, 0], rho, nn * sizeof(double complex))
                out_pos += 1

    if fail_step >= 0:
        raise TraceDriftError(f"trace drifted by {fail_drift:.3e} at step {fail_step}")
    return out_np
