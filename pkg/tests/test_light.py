import numpy as np
import pytest

from cavmol.errors import InsufficientTruncationError, StateError
from cavmol.light import (
    FieldKernels,
    Fock,
    FockSuperposition,
    SqueezedVacuum,
    antisym_corr,
    corr_oracle,
    covariance_kernel,
    field_kernels,
    mandel_parameter,
    mean_field,
    mean_photon_number,
    quadrature_squeezing,
    response_kernel,
    state_vector,
    sym_corr,
)

SUP_02_08 = FockSuperposition(0, np.sqrt(0.2), np.sqrt(0.8))
SUP_HALF = FockSuperposition(4, np.sqrt(0.5), np.sqrt(0.5))


class TestStateValidation:
    def test_superposition_normalization(self):
        with pytest.raises(StateError):
            FockSuperposition(0, 0.9, 0.9)

    def test_negative_r(self):
        with pytest.raises(StateError):
            SqueezedVacuum(-0.1)

    def test_negative_n(self):
        with pytest.raises(StateError):
            Fock(-1)

    def test_mean_photon_numbers(self):
        assert mean_photon_number(Fock(10)) == 10
        assert mean_photon_number(SUP_02_08) == pytest.approx(0.8)
        assert mean_photon_number(SqueezedVacuum(0.2)) == pytest.approx(np.sinh(0.2) ** 2)


class TestMeanField:
    def test_fock_vanishes(self):
        assert mean_field(Fock(1), 0.01, 0.75, 12.3) == 0.0

    def test_squeezed_vanishes(self):
        assert mean_field(SqueezedVacuum(1.2), 0.01, 0.9, 5.0) == 0.0

    def test_superposition_value_at_zero(self):
        # 2 g sqrt(n+1) c_n c_{n+1} at t = 0 with n = 4 and equal weights
        got = mean_field(SUP_HALF, 0.01, 0.9, 0.0)
        assert got == pytest.approx(0.01 * np.sqrt(5.0))

    def test_oscillates_at_cavity_frequency(self):
        omega_c = 0.75
        t = np.pi / (2 * omega_c)
        assert mean_field(SUP_02_08, 0.01, omega_c, t) == pytest.approx(0.0, abs=1e-15)


class TestSymCorr:
    def test_fock_equal_times(self):
        assert sym_corr(Fock(1), 0.02, 0.75, 7.7, 7.7) == pytest.approx(3 * 0.02**2)

    def test_vacuum_limit_of_squeezing(self):
        t, tp = 3.1, 0.4
        assert sym_corr(SqueezedVacuum(0.0), 0.01, 0.9, t, tp) == pytest.approx(
            sym_corr(Fock(0), 0.01, 0.9, t, tp)
        )

    def test_superposition_equal_times(self):
        # (0.5*9 + 0.5*11) = 10 in units of g^2
        assert sym_corr(SUP_HALF, 0.01, 0.9, 2.2, 2.2) == pytest.approx(10 * 0.01**2)


class TestAntisymCorr:
    def test_vanishes_at_equal_times(self):
        assert antisym_corr(0.01, 0.75, 4.0, 4.0) == 0.0

    def test_quarter_period_value(self):
        omega_c = 0.75
        t_p = 1.0
        t = t_p + np.pi / (2 * omega_c)
        assert antisym_corr(0.01, omega_c, t, t_p) == pytest.approx(-(0.01**2))

    def test_state_independent_against_oracle(self):
        # unbounded-support states need a deep cutoff to hide the truncated
        # ladder's broken commutator at the top level
        for state, trunc in ((Fock(5), 60), (SqueezedVacuum(1.2), 120)):
            _, anti, _ = corr_oracle(state, 0.01, 0.9, trunc, 3.0, 1.2)
            assert anti == pytest.approx(antisym_corr(0.01, 0.9, 3.0, 1.2), abs=1e-10)

    def test_response_kernel_is_twice_antisym(self):
        assert response_kernel(0.01, 0.75, 5.0, 1.0) == pytest.approx(
            2 * antisym_corr(0.01, 0.75, 5.0, 1.0)
        )


class TestCovarianceKernel:
    def test_fock_equals_sym(self):
        assert covariance_kernel(Fock(4), 0.01, 0.75, 2.0, 5.0) == sym_corr(
            Fock(4), 0.01, 0.75, 2.0, 5.0
        )

    def test_superposition_centering(self):
        # g^2 (0.2*1 + 0.8*3) - (2 g c0 c1)^2 = (2.6 - 0.64) g^2
        g = 0.013
        got = covariance_kernel(SUP_02_08, g, 0.75, 0.0, 0.0)
        assert got == pytest.approx(1.96 * g**2)

    def test_squeezed_equals_sym(self):
        assert covariance_kernel(SqueezedVacuum(0.2), 0.01, 0.9, 1.0, 4.0) == sym_corr(
            SqueezedVacuum(0.2), 0.01, 0.9, 1.0, 4.0
        )


class TestKernelProperties:
    @pytest.mark.parametrize(
        "state,omega_c",
        [(Fock(3), 0.75), (SUP_02_08, 0.75), (SqueezedVacuum(0.2), 0.9)],
    )
    def test_symmetry_and_antisymmetry(self, state, omega_c):
        rng = np.random.default_rng(11)
        t = rng.uniform(0, 60, size=1000)
        tp = rng.uniform(0, 60, size=1000)
        c_diff = sym_corr(state, 0.01, omega_c, t, tp) - sym_corr(state, 0.01, omega_c, tp, t)
        a_sum = antisym_corr(0.01, omega_c, t, tp) + antisym_corr(0.01, omega_c, tp, t)
        assert np.max(np.abs(c_diff)) == 0.0
        assert np.max(np.abs(a_sum)) == 0.0

    def test_fock_kernels_are_stationary(self):
        rng = np.random.default_rng(12)
        t = rng.uniform(0, 40, size=200)
        tp = rng.uniform(0, 40, size=200)
        shifted = sym_corr(Fock(2), 0.01, 0.75, t + 9.1, tp + 9.1)
        assert np.max(np.abs(shifted - sym_corr(Fock(2), 0.01, 0.75, t, tp))) < 1e-15

    def test_squeezed_kernel_is_not_stationary(self):
        t, tp = 1.0, 0.5
        base = sym_corr(SqueezedVacuum(0.2), 0.01, 0.9, t, tp)
        shifted = sym_corr(SqueezedVacuum(0.2), 0.01, 0.9, t + 2.0, tp + 2.0)
        assert abs(base - shifted) > 1e-8

    @pytest.mark.parametrize(
        "state", [Fock(2), SUP_02_08, SUP_HALF, SqueezedVacuum(0.7)]
    )
    def test_separable_components_rebuild_kernels(self, state):
        kernels = field_kernels(state, 0.011, 0.85)
        rng = np.random.default_rng(13)
        t = rng.uniform(0, 50, size=400)
        tp = rng.uniform(0, 50, size=400)
        cov_direct = kernels.cov(t, tp)
        cov_built = sum(f(t) * h(tp) for f, h in kernels.cov_components)
        chi_built = sum(f(t) * h(tp) for f, h in kernels.chi_components)
        assert np.max(np.abs(cov_built - cov_direct)) < 1e-12
        assert np.max(np.abs(chi_built - kernels.chi(t, tp))) < 1e-12

    def test_zero_kernels(self):
        z = FieldKernels.zero()
        assert z.mean(np.arange(3.0)).max() == 0.0
        assert z.cov(1.0, 2.0) == 0.0


class TestStateVector:
    def test_fock(self):
        v = state_vector(Fock(1), 5)
        assert np.array_equal(v, np.eye(6)[1])

    def test_squeezed_r0_is_vacuum(self):
        v = state_vector(SqueezedVacuum(0.0), 10)
        assert np.array_equal(v, np.eye(11)[0])

    def test_squeezed_even_support_and_mean(self):
        v = state_vector(SqueezedVacuum(0.2), 40)
        assert np.max(np.abs(v[1::2])) == 0.0
        n_mean = np.sum(np.arange(41) * np.abs(v) ** 2)
        assert n_mean == pytest.approx(np.sinh(0.2) ** 2, abs=1e-8)

    def test_fock_trunc_rejected(self):
        with pytest.raises(InsufficientTruncationError):
            state_vector(Fock(10), 2)

    def test_superposition_trunc_rejected(self):
        with pytest.raises(InsufficientTruncationError):
            state_vector(SUP_HALF, 4)

    def test_squeezed_trunc_rejected(self):
        with pytest.raises(InsufficientTruncationError):
            state_vector(SqueezedVacuum(1.2), 30)

    def test_normalized(self):
        for state in (Fock(3), SUP_02_08, SqueezedVacuum(1.2)):
            v = state_vector(state, 80)
            assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


class TestOracleAgreement:
    # tolerances reflect the truncated squeeze-operator build: finite-support
    # states are exact, the r=1.2 tail costs ~7e-4 * g^2 at trunc=60 and is
    # gone by trunc=120
    @pytest.mark.parametrize(
        "state,omega_c,g,trunc,tol",
        [
            (Fock(0), 0.75, 0.01, 60, 1e-10),
            (Fock(1), 0.75, 0.01, 60, 1e-10),
            (Fock(10), 0.9, 0.01, 60, 1e-10),
            (SUP_02_08, 0.75, 0.015, 60, 1e-10),
            (SUP_HALF, 0.9, 0.0025, 60, 1e-10),
            (SqueezedVacuum(0.2), 0.9, 0.005, 60, 1e-10),
            (SqueezedVacuum(1.2), 0.9, 0.005, 60, 3e-8),
            (SqueezedVacuum(1.2), 0.9, 0.005, 120, 1e-10),
        ],
    )
    def test_closed_forms_match_oracle(self, state, omega_c, g, trunc, tol):
        times = np.linspace(0.0, 50.0, 8)
        worst = 0.0
        for t in times:
            for tp in times:
                sym_o, anti_o, mean_o = corr_oracle(state, g, omega_c, trunc, t, tp)
                worst = max(worst, abs(sym_o - sym_corr(state, g, omega_c, t, tp)))
                worst = max(worst, abs(anti_o - antisym_corr(g, omega_c, t, tp)))
                worst = max(worst, abs(mean_o - mean_field(state, g, omega_c, t)))
        assert worst < tol

    def test_oracle_symmetries(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            t, tp = rng.uniform(0, 30, size=2)
            s1, a1, _ = corr_oracle(SUP_02_08, 0.01, 0.75, 40, t, tp)
            s2, a2, _ = corr_oracle(SUP_02_08, 0.01, 0.75, 40, tp, t)
            assert abs(s1 - s2) < 1e-10
            assert abs(a1 + a2) < 1e-10

    def test_oracle_requires_buffer(self):
        with pytest.raises(InsufficientTruncationError):
            corr_oracle(Fock(5), 0.01, 0.75, 10, 1.0, 2.0)


class TestDiagnostics:
    def test_superpositions_are_sub_poissonian(self):
        assert mandel_parameter(SUP_02_08) < 0
        assert mandel_parameter(SUP_HALF) < 0

    @pytest.mark.parametrize("r", [0.2, 1.2])
    def test_squeezing_parameter(self, r):
        expected = -0.5 * (1.0 - np.exp(-2.0 * r))
        assert quadrature_squeezing(SqueezedVacuum(r), trunc=160) == pytest.approx(
            expected, abs=1e-8
        )

    def test_mandel_undefined_for_vacuum(self):
        with pytest.raises(StateError):
            mandel_parameter(Fock(0))
