import numpy as np
import pytest

from cavmol.errors import DimensionMismatchError, NonHermitianError, StateError
from cavmol.hilbert import (
    DensityMatrix,
    OperatorMatrix,
    SpectralPropagator,
    eigendecompose,
    evolve_unitary,
    fock_annihilation,
    identity,
    partial_trace_last,
    tensor,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def random_density(rng, dims):
    d = int(np.prod(dims))
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = m @ m.conj().T
    m /= np.trace(m)
    return DensityMatrix(OperatorMatrix(m, dims))


class TestOperatorMatrix:
    def test_subsystem_dims_must_match(self):
        with pytest.raises(DimensionMismatchError):
            OperatorMatrix(np.eye(4), (2, 3))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatchError):
            OperatorMatrix(np.ones((2, 3)), (2,))

    def test_hermitian_flag_checked(self):
        with pytest.raises(NonHermitianError):
            OperatorMatrix(np.array([[0, 1], [0, 0]]), (2,), hermitian=True)

    def test_entries_are_frozen(self):
        op = OperatorMatrix(np.eye(2), (2,))
        with pytest.raises(ValueError):
            op.entries[0, 0] = 5.0


class TestDensityMatrix:
    def test_trace_must_be_one(self):
        with pytest.raises(StateError):
            DensityMatrix(OperatorMatrix(2 * np.eye(2), (2,)))

    def test_must_be_hermitian(self):
        m = np.array([[0.5, 0.3], [0.0, 0.5]], dtype=complex)
        with pytest.raises(StateError):
            DensityMatrix(OperatorMatrix(m, (2,)))

    def test_negative_eigenvalue_rejected(self):
        m = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(StateError):
            DensityMatrix(OperatorMatrix(m, (2,)))

    def test_pure_normalizes(self):
        rho = DensityMatrix.pure([2.0, 0.0], (2,))
        assert np.allclose(rho.entries, np.diag([1.0, 0.0]))


class TestTensor:
    def test_identity_case(self):
        out = tensor(identity((2,)), identity((3,)))
        assert out.subsystem_dims == (2, 3)
        assert np.array_equal(out.entries, np.eye(6))

    def test_disjoint_supports_commute(self):
        a = tensor(OperatorMatrix(SZ, (2,)), identity((2,)))
        b = tensor(identity((2,)), OperatorMatrix(SZ, (2,)))
        comm = a.entries @ b.entries - b.entries @ a.entries
        assert np.array_equal(comm, np.zeros((4, 4)))

    def test_coupling_matrix_element(self):
        # <e,0| sigma_x ox (a + a^dag) |g,1> = 1 at photon truncation 1;
        # the 4x4 Kronecker product is [[0, X], [X, 0]] with X = [[0,1],[1,0]]
        a = fock_annihilation(1)
        x = OperatorMatrix(a.entries + a.entries.conj().T, (2,))
        op = tensor(OperatorMatrix(SX, (2,)), x)
        e0, g1 = 0, 3
        assert op.entries[e0, g1] == pytest.approx(1.0)
        expected = np.array(
            [
                [0, 0, 0, 1],
                [0, 0, 1, 0],
                [0, 1, 0, 0],
                [1, 0, 0, 0],
            ],
            dtype=complex,
        )
        assert np.array_equal(op.entries, expected)

    def test_associative(self):
        # integer entries keep the triple products exactly representable
        rng = np.random.default_rng(0)
        ops = [
            OperatorMatrix(
                rng.integers(-4, 5, size=(d, d)) + 1j * rng.integers(-4, 5, size=(d, d)), (d,)
            )
            for d in (2, 3, 2)
        ]
        left = tensor(tensor(ops[0], ops[1]), ops[2])
        right = tensor(ops[0], tensor(ops[1], ops[2]))
        assert np.array_equal(left.entries, right.entries)


class TestPartialTrace:
    def test_product_state_factorizes(self):
        rng = np.random.default_rng(1)
        a = random_density(rng, (2,))
        b = random_density(rng, (3,))
        joint = DensityMatrix(OperatorMatrix(np.kron(a.entries, b.entries), (2, 3)))
        reduced = partial_trace_last(joint, (2,))
        assert np.max(np.abs(reduced.entries - a.entries)) < 1e-12

    def test_bell_pair_maximally_mixed(self):
        psi = np.zeros(4, dtype=complex)
        psi[0] = psi[3] = 1 / np.sqrt(2)  # (|e,0> + |g,1>) / sqrt(2)
        joint = DensityMatrix.pure(psi, (2, 2))
        reduced = partial_trace_last(joint, (2,))
        assert np.allclose(reduced.entries, np.diag([0.5, 0.5]), atol=1e-12)

    def test_trace_preserved(self):
        rng = np.random.default_rng(2)
        joint = random_density(rng, (2, 2, 3))
        reduced = partial_trace_last(joint, (2, 2))
        assert abs(np.trace(reduced.entries) - 1.0) < 1e-12

    def test_bad_keep_dims(self):
        rng = np.random.default_rng(3)
        joint = random_density(rng, (2, 3))
        with pytest.raises(DimensionMismatchError):
            partial_trace_last(joint, (3,))
        with pytest.raises(DimensionMismatchError):
            partial_trace_last(joint, (2, 3))


class TestEigendecompose:
    def test_sigma_z_spectrum(self):
        w, _ = eigendecompose(OperatorMatrix(SZ, (2,)))
        assert np.allclose(w, [-1.0, 1.0])

    def test_photon_number_spectrum(self):
        a = fock_annihilation(5)
        n_op = OperatorMatrix(0.75 * a.entries.conj().T @ a.entries, (6,))
        w, _ = eigendecompose(n_op)
        assert np.allclose(w, 0.75 * np.arange(6), atol=1e-12)

    def test_random_hermitian_reconstruction(self):
        rng = np.random.default_rng(4)
        m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        h = OperatorMatrix(m + m.conj().T, (8,))
        w, v = eigendecompose(h)
        assert np.all(np.diff(w) >= 0)
        assert np.max(np.abs(v.entries.conj().T @ v.entries - np.eye(8))) < 1e-12
        recon = v.entries @ np.diag(w) @ v.entries.conj().T
        assert np.max(np.abs(recon - h.entries)) < 1e-10 * (1 + np.max(np.abs(w)))

    def test_non_hermitian_rejected(self):
        with pytest.raises(NonHermitianError):
            eigendecompose(OperatorMatrix(np.array([[0, 1], [0, 0]]), (2,)))


class TestEvolveUnitary:
    def test_zero_hamiltonian(self):
        rho = DensityMatrix.pure([1.0, 1.0], (2,))
        out = evolve_unitary(OperatorMatrix(np.zeros((2, 2)), (2,)), 3.7, rho)
        assert np.max(np.abs(out.entries - rho.entries)) < 1e-14

    def test_larmor_half_period(self):
        h = OperatorMatrix(0.5 * SZ, (2,))
        plus = DensityMatrix.pure([1.0, 1.0], (2,))
        minus = DensityMatrix.pure([1.0, -1.0], (2,))
        out = evolve_unitary(h, np.pi, plus)
        assert np.max(np.abs(out.entries - minus.entries)) < 1e-12

    def test_purity_over_many_steps_diagonal_generator(self):
        prop = SpectralPropagator(OperatorMatrix(0.5 * SZ, (2,)))
        state = DensityMatrix.pure([0.8, 0.6], (2,))
        purity0 = np.real(np.trace(state.entries @ state.entries))
        for _ in range(10_000):
            state = prop.evolve(state, 0.02)
        assert abs(np.real(np.trace(state.entries @ state.entries)) - purity0) < 1e-12

    def test_invariants_over_many_steps(self):
        h = OperatorMatrix(0.4 * SZ + 0.3 * SX, (2,))
        prop = SpectralPropagator(h)
        state = DensityMatrix.pure([0.8, 0.6], (2,))
        purity0 = np.real(np.trace(state.entries @ state.entries))
        energy0 = np.real(np.trace(h.entries @ state.entries))
        for _ in range(10_000):
            state = prop.evolve(state, 0.02)
        assert abs(np.trace(state.entries) - 1.0) < 1e-10
        assert np.max(np.abs(state.entries - state.entries.conj().T)) < 1e-10
        assert abs(np.real(np.trace(state.entries @ state.entries)) - purity0) < 1e-10
        assert abs(np.real(np.trace(h.entries @ state.entries)) - energy0) < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            evolve_unitary(
                OperatorMatrix(np.zeros((3, 3)), (3,)), 0.1, DensityMatrix.pure([1, 0], (2,))
            )
