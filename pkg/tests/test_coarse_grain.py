import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deepvqe import (
    DegenerateBasisError,
    ExcitationSet,
    LocalBasis,
    PauliSum,
    StateVector,
    SupportError,
    ValidationError,
    build_local_basis,
    exact_spectrum,
    expectation,
    gram_matrix,
    heisenberg_hamiltonian,
    matrix_elements,
    multi_state_basis,
    orthonormalize,
    spin_excitation_set,
)
from deepvqe.models import Partition


def ground_reference(n):
    h = heisenberg_hamiltonian(n)
    spec = exact_spectrum(h, k=1, with_vectors=True)
    return StateVector(n, spec.eigenvectors[:, 0]), h


def random_state(rng, n):
    v = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return StateVector(n, v / np.linalg.norm(v))


def pauli_ops(n, labels):
    return [PauliSum.identity(n)] + [PauliSum.from_label(l) for l in labels]


class TestGramMatrix:
    def test_zero_reference_ixz(self):
        ref = StateVector.from_bitstring("0")
        ops = [PauliSum.identity(1), PauliSum.from_label("X"), PauliSum.from_label("Z")]
        g = gram_matrix(ref, ops)
        assert np.allclose(g, [[1, 0, 1], [0, 1, 0], [1, 0, 1]])

    def test_identity_only(self):
        rng = np.random.default_rng(0)
        ref = random_state(rng, 2)
        g = gram_matrix(ref, [PauliSum.identity(2)])
        assert np.allclose(g, [[1.0]])

    def test_su2_rank_deficiency_on_full_pauli_set(self):
        # total-spin symmetry of the singlet reference kills three directions
        ref, _ = ground_reference(4)
        partition = Partition.from_sizes([4])
        full_set = spin_excitation_set("w", partition, 0)
        g = gram_matrix(ref, full_set)
        assert len(full_set) == 13
        eigs = np.linalg.eigvalsh(g)
        assert np.sum(eigs < 1e-10) == 3
        _, rank = orthonormalize(g)
        assert rank == 10

    @given(st.integers(0, 10**6))
    @settings(max_examples=20, deadline=None)
    def test_hermitian_psd(self, seed):
        rng = np.random.default_rng(seed)
        ref = random_state(rng, 2)
        labels = ["".join(rng.choice(list("IXYZ"), size=2)) for _ in range(3)]
        g = gram_matrix(ref, pauli_ops(2, labels))
        assert np.allclose(g, g.conj().T, atol=1e-10)
        assert np.linalg.eigvalsh(g).min() >= -1e-10


class TestOrthonormalize:
    def test_identity_gram(self):
        s, rank = orthonormalize(np.eye(3))
        assert rank == 3
        assert np.allclose(s.conj().T @ np.eye(3) @ s, np.eye(3))

    def test_rank_two_example(self):
        g = np.array([[1, 0, 1], [0, 1, 0], [1, 0, 1]], dtype=complex)
        s, rank = orthonormalize(g)
        assert rank == 2
        assert np.allclose(s.conj().T @ g @ s, np.eye(2), atol=1e-10)

    def test_constructed_rank(self):
        rng = np.random.default_rng(5)
        for target_rank in (1, 2, 4):
            b = rng.standard_normal((target_rank, 6)) + 1j * rng.standard_normal((target_rank, 6))
            g = b.conj().T @ b
            s, rank = orthonormalize(g)
            assert rank == target_rank
            assert np.allclose(s.conj().T @ g @ s, np.eye(rank), atol=1e-8)

    def test_rank_zero(self):
        with pytest.raises(DegenerateBasisError):
            orthonormalize(np.zeros((3, 3)))

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValidationError):
            orthonormalize(np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestMatrixElements:
    def test_zero_reference_ix_with_z(self):
        ref = StateVector.from_bitstring("0")
        ops = [PauliSum.identity(1), PauliSum.from_label("X")]
        s, rank = orthonormalize(gram_matrix(ref, ops))
        m = matrix_elements(ref, ops, s, PauliSum.from_label("Z"))
        assert np.allclose(np.sort(np.linalg.eigvalsh(m)), [-1, 1], atol=1e-10)

    def test_identity_projects_to_identity(self):
        rng = np.random.default_rng(1)
        ref = random_state(rng, 2)
        ops = pauli_ops(2, ["XI", "ZY"])
        s, rank = orthonormalize(gram_matrix(ref, ops))
        m = matrix_elements(ref, ops, s, PauliSum.identity(2))
        assert np.allclose(m, np.eye(rank), atol=1e-10)

    def test_ground_energy_is_exact_eigenvalue(self):
        ref, h = ground_reference(4)
        e0 = exact_spectrum(h, k=1).eigenvalues[0]
        partition = Partition.from_sizes([4])
        ops = spin_excitation_set("w2", partition, 0)
        s, rank = orthonormalize(gram_matrix(ref, ops))
        m = matrix_elements(ref, ops, s, h)
        assert np.min(np.abs(np.linalg.eigvalsh(m) - e0)) < 1e-9

    def test_support_violation(self):
        ref = StateVector.from_bitstring("00")
        ops = pauli_ops(2, ["XI"])
        s, _ = orthonormalize(gram_matrix(ref, ops))
        with pytest.raises(SupportError):
            matrix_elements(ref, ops, s, PauliSum.from_label("XXX"))

    @given(st.integers(0, 10**6))
    @settings(max_examples=20, deadline=None)
    def test_hermitian_observable_projects_hermitian(self, seed):
        rng = np.random.default_rng(seed)
        ref = random_state(rng, 2)
        labels = ["".join(rng.choice(list("IXYZ"), size=2)) for _ in range(3)]
        ops = pauli_ops(2, labels)
        a = PauliSum.zero(2)
        for _ in range(3):
            a = a + PauliSum.from_label(
                "".join(rng.choice(list("IXYZ"), size=2)), rng.standard_normal()
            )
        s, _ = orthonormalize(gram_matrix(ref, ops))
        m = matrix_elements(ref, ops, s, a)
        assert np.max(np.abs(m - m.conj().T)) < 1e-10

    def test_reference_row_reconstructs_reference_energy(self):
        # coordinates of the reference in the orthonormal basis: c = S^dag G e_1
        ref, h = ground_reference(4)
        partition = Partition.from_sizes([4])
        ops = spin_excitation_set("w1", partition, 0)
        g = gram_matrix(ref, ops)
        s, _ = orthonormalize(g)
        m = matrix_elements(ref, ops, s, h)
        coords = s.conj().T @ g[:, 0]
        value = coords.conj() @ m @ coords
        assert value.real == pytest.approx(expectation(ref, h), abs=1e-10)
        assert abs(np.linalg.norm(coords) - 1.0) < 1e-10


class TestBuildLocalBasis:
    def test_boundary_set_ranks(self):
        ref, _ = ground_reference(4)
        partition = Partition.from_sizes([4, 4])
        edge = build_local_basis(ref, spin_excitation_set("w1", partition, 0))
        assert edge.rank == 4
        partition3 = Partition.from_sizes([4, 4, 4])
        bulk = build_local_basis(ref, spin_excitation_set("w1", partition3, 1))
        assert bulk.rank == 7

    def test_all_but_right_edge_rank(self):
        ref, _ = ground_reference(4)
        partition = Partition.from_sizes([4, 4])
        basis = build_local_basis(ref, spin_excitation_set("w2", partition, 0))
        assert basis.rank == 10
        assert len(basis.excitations) == 10

    def test_orthonormality_invariant(self):
        ref, _ = ground_reference(4)
        partition = Partition.from_sizes([4, 4])
        basis = build_local_basis(ref, spin_excitation_set("w2", partition, 0))
        g = gram_matrix(basis.references, basis.excitations)
        assert np.max(np.abs(basis.transform.conj().T @ g @ basis.transform - np.eye(basis.rank))) < 1e-8

    def test_json_round_trip(self):
        ref, _ = ground_reference(4)
        partition = Partition.from_sizes([4])
        basis = build_local_basis(ref, spin_excitation_set("w1", partition, 0))
        restored = LocalBasis.from_json(basis.to_json())
        assert restored.rank == basis.rank
        assert np.allclose(restored.transform, basis.transform)
        assert restored.excitations.operators == basis.excitations.operators
        assert np.allclose(
            restored.references[0].amplitudes, basis.references[0].amplitudes
        )


class TestMultiStateBasis:
    def test_single_reference_matches_build(self):
        ref, _ = ground_reference(4)
        partition = Partition.from_sizes([4, 4])
        ops = spin_excitation_set("w1", partition, 0)
        a = build_local_basis(ref, ops)
        b = multi_state_basis([ref], ops)
        assert a.rank == b.rank
        assert np.allclose(a.transform, b.transform)

    def test_two_references_identity_only(self):
        h = heisenberg_hamiltonian(4)
        spec = exact_spectrum(h, k=2, with_vectors=True)
        refs = [StateVector(4, spec.eigenvectors[:, i]) for i in range(2)]
        exc = ExcitationSet(0, (PauliSum.identity(4),))
        basis = multi_state_basis(refs, exc)
        assert basis.rank == 2

    def test_non_orthogonal_references_rejected(self):
        rng = np.random.default_rng(2)
        a = random_state(rng, 2)
        mixed = StateVector(2, (a.amplitudes + random_state(rng, 2).amplitudes) / 2)
        mixed = StateVector(2, mixed.amplitudes / np.linalg.norm(mixed.amplitudes))
        with pytest.raises(ValidationError):
            multi_state_basis([a, mixed], [PauliSum.identity(2)])

    def test_larger_subspace_lowers_first_excited(self):
        h = heisenberg_hamiltonian(4)
        spec = exact_spectrum(h, k=2, with_vectors=True)
        refs = [StateVector(4, spec.eigenvectors[:, i]) for i in range(2)]
        partition = Partition.from_sizes([4, 4])
        ops = spin_excitation_set("w2", partition, 0)
        single = build_local_basis(refs[0], ops)
        multi = multi_state_basis(refs, ops)
        e1_single = np.linalg.eigvalsh(
            matrix_elements(single.references, ops, single.transform, h)
        )[1]
        e1_multi = np.linalg.eigvalsh(
            matrix_elements(multi.references, ops, multi.transform, h)
        )[1]
        assert e1_multi <= e1_single + 1e-10


class TestProjectionMonotonicity:
    @given(st.integers(0, 10**6))
    @settings(max_examples=15, deadline=None)
    def test_nested_sets_lower_eigenvalues(self, seed):
        rng = np.random.default_rng(seed)
        ref = random_state(rng, 2)
        a = PauliSum.zero(2)
        for _ in range(4):
            a = a + PauliSum.from_label(
                "".join(rng.choice(list("IXYZ"), size=2)), rng.standard_normal()
            )
        small = pauli_ops(2, ["XI"])
        large = small + [PauliSum.from_label("ZY"), PauliSum.from_label("IX")]
        s_small, k_small = orthonormalize(gram_matrix(ref, small))
        s_large, k_large = orthonormalize(gram_matrix(ref, large))
        ev_small = np.linalg.eigvalsh(matrix_elements(ref, small, s_small, a))
        ev_large = np.linalg.eigvalsh(matrix_elements(ref, large, s_large, a))
        for m in range(k_small):
            assert ev_large[m] <= ev_small[m] + 1e-9


class TestExcitationSet:
    def test_first_operator_must_be_identity(self):
        with pytest.raises(ValidationError):
            ExcitationSet(0, (PauliSum.from_label("X"),))

    def test_counts(self):
        partition = Partition.from_sizes([4, 4])
        assert len(spin_excitation_set("w", partition, 0)) == 13
        assert len(spin_excitation_set("w2", partition, 0)) == 10
        assert len(spin_excitation_set("w1", partition, 0)) == 4
