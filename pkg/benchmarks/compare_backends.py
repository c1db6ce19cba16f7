#!/usr/bin/env python3
"""Benchmark the compiled master-equation loop against the numpy fallback.

Runs the second-order propagation for a one-photon Rabi scenario and a
four-atom Dicke scenario on realistic grids, through three routes:

* separable engine, compiled loop (when the extension is built)
* separable engine, pure-numpy loop
* history engine (O(n_steps^2) reference), on a shortened window

Usage: python benchmarks/compare_backends.py
"""

import time

import numpy as np

from cavmol import (
    BACKEND,
    DensityMatrix,
    Fock,
    ModelKind,
    ModelSpec,
    PropagationGrid,
    propagate_qcme,
)
from cavmol._backend import _qcme_loop_separable_np, qcme_loop_separable
from cavmol.light import field_kernels
from cavmol.propagators import _component_arrays
from cavmol.models import coupling_operator, molecular_hamiltonian


def loop_inputs(spec, light, rho0, grid):
    kernels = field_kernels(light, spec.g, spec.omega_c)
    times = grid.times
    cov_f, cov_g = _component_arrays(kernels.cov_components, times)
    chi_f, chi_g = _component_arrays(kernels.chi_components, times)
    mean_arr = np.asarray(kernels.mean(times), dtype=float)
    energies = np.real(np.diag(molecular_hamiltonian(spec).entries))
    k_mat = coupling_operator(spec).entries
    idx = np.arange(0, grid.n_steps + 1, 16, dtype=np.intp)
    return (
        rho0.entries.astype(complex),
        energies,
        k_mat,
        mean_arr,
        cov_f,
        cov_g,
        chi_f,
        chi_g,
        grid.dt,
        2,
        idx,
        1e-4,
    )


def wall(fn, *args, repeat=3):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    print(f"selected backend: {BACKEND}")
    dt = 2 * np.pi / 400.0

    cases = []
    rabi = ModelSpec(kind=ModelKind.RABI, omega_c=0.75, g=0.01, photon_trunc=24)
    rho_r = DensityMatrix.pure([0.0, 1.0], (2,))
    cases.append(("rabi, one photon, t_max=400 (25k steps, dim 2)", rabi, Fock(1), rho_r,
                  PropagationGrid(t_max=400.0, dt=dt)))

    dicke = ModelSpec(kind=ModelKind.DICKE, omega_c=0.75, g=0.008, photon_trunc=60, n_atoms=4)
    v = np.zeros(16)
    v[0] = 1.0
    rho_d = DensityMatrix.pure(v, (2, 2, 2, 2))
    cases.append(("dicke N=4, ten photons, t_max=190 (12k steps, dim 16)", dicke, Fock(10), rho_d,
                  PropagationGrid(t_max=190.0, dt=dt)))

    for label, spec, light, rho0, grid in cases:
        args = loop_inputs(spec, light, rho0, grid)
        print(f"\n{label}")
        t_np = wall(_qcme_loop_separable_np, *args)
        print(f"  separable / numpy  : {t_np * 1e3:9.1f} ms")
        if BACKEND == "cython":
            t_cy = wall(qcme_loop_separable, *args)
            print(f"  separable / cython : {t_cy * 1e3:9.1f} ms   ({t_np / t_cy:.1f}x faster)")
        short = PropagationGrid(t_max=min(grid.t_max, 60.0), dt=grid.dt)
        start = time.perf_counter()
        propagate_qcme(spec, light, rho0, short, order=2, engine="history")
        t_hist = time.perf_counter() - start
        print(f"  history reference  : {t_hist * 1e3:9.1f} ms   (on {short.n_steps} steps only)")


if __name__ == "__main__":
    main()
