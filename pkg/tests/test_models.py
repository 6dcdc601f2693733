import numpy as np
import pytest

from deepvqe import (
    ArityError,
    FermionTerm,
    PartitionError,
    PauliString,
    PauliSum,
    SupportError,
    ValidationError,
    assemble_partitioned,
    fermion_excitation_set,
    heisenberg_chain,
    heisenberg_hamiltonian,
    jordan_wigner,
    jordan_wigner_hamiltonian,
    ladder_operator,
    load_fermion_terms,
    momentum_partition,
    save_fermion_terms,
    spin_excitation_set,
    split_hamiltonian,
    to_dense,
    truncated_ladder_op,
)
from deepvqe.models import Partition


def fock_matrix(terms, n_modes):
    """Occupation-number-basis oracle with explicit fermionic sign rules.

    Independent of the qubit mapping: bit j-1 of the basis index is the
    occupation of mode j and each ladder operator contributes the parity of
    the occupied modes below it.
    """
    dim = 1 << n_modes
    h = np.zeros((dim, dim), dtype=complex)
    for term in terms:
        for b in range(dim):
            amp, state, ok = term.coefficient, b, True
            for mode, dagger in reversed(term.factors):
                bit = 1 << (mode - 1)
                if dagger == bool(state & bit):
                    ok = False
                    break
                amp *= (-1) ** (state & (bit - 1)).bit_count()
                state ^= bit
            if ok:
                h[state, b] += amp
    return h


def quadratic_terms(rng, n_modes, count=4):
    terms = []
    for _ in range(count):
        i, j = rng.integers(1, n_modes + 1, size=2)
        t = complex(rng.standard_normal(), rng.standard_normal())
        terms.append(FermionTerm(t, ((int(i), True), (int(j), False))))
        terms.append(FermionTerm(t, ((int(i), True), (int(j), False))).conjugate())
    return terms


class TestHeisenbergChain:
    def test_term_counts_two_by_four(self):
        partition = Partition.from_sizes([4, 4])
        intra, inter = heisenberg_chain(8, partition)
        assert sum(h.n_terms for h in intra) == 18
        assert len(inter) == 3
        assert {(t.i, t.j) for t in inter} == {(0, 1)}

    def test_term_counts_three_by_four(self):
        partition = Partition.from_sizes([4, 4, 4])
        intra, inter = heisenberg_chain(12, partition)
        assert len(inter) == 6
        assert {(t.i, t.j) for t in inter} == {(0, 1), (1, 2)}

    def test_reassembly_is_term_for_term_identical(self):
        partition = Partition.from_sizes([4, 4])
        intra, inter = heisenberg_chain(8, partition)
        assert assemble_partitioned(partition, intra, inter) == heisenberg_hamiltonian(8)

    def test_total_spectrum(self):
        partition = Partition.from_sizes([4, 4])
        intra, inter = heisenberg_chain(8, partition)
        total = assemble_partitioned(partition, intra, inter)
        e0 = np.linalg.eigvalsh(to_dense(total))[0]
        assert e0 == pytest.approx(-13.500, abs=5e-4)

    def test_three_subsystem_term_rejected(self):
        partition = Partition.from_sizes([1, 1, 1])
        spread = PauliSum.from_label("XXX")
        with pytest.raises(ArityError):
            split_hamiltonian(spread, partition)


class TestPartition:
    def test_from_sizes(self):
        p = Partition.from_sizes([2, 3])
        assert p.subsystems == ((1, 2), (3, 4, 5))
        assert p.subsystem_of(4) == 1
        assert p.offset(1) == 2

    def test_non_contiguous_rejected(self):
        with pytest.raises(PartitionError):
            Partition(4, ((1, 3), (2, 4)))

    def test_gap_rejected(self):
        with pytest.raises(PartitionError):
            Partition(4, ((1, 2),))


class TestSpinExcitationSets:
    def test_counts(self):
        partition = Partition.from_sizes([4, 4, 4])
        assert len(spin_excitation_set("w", partition, 0)) == 13
        assert len(spin_excitation_set("w1", partition, 1)) == 7  # bulk: both edges
        assert len(spin_excitation_set("w1", partition, 0)) == 4  # edge subsystem
        assert len(spin_excitation_set("w2", partition, 0)) == 10

    def test_w1_sites(self):
        partition = Partition.from_sizes([4, 4, 4])
        ops = spin_excitation_set("w1", partition, 1).operators
        touched = {q for op in ops[1:] for q in op.support}
        assert touched == {1, 4}

    def test_w2_drops_right_edge(self):
        partition = Partition.from_sizes([4, 4])
        ops = spin_excitation_set("w2", partition, 1).operators
        touched = {q for op in ops[1:] for q in op.support}
        assert touched == {1, 2, 3}

    def test_invalid_kind(self):
        with pytest.raises(ValidationError):
            spin_excitation_set("w3", Partition.from_sizes([4]), 0)


class TestJordanWigner:
    def test_first_mode_has_no_parity_string(self):
        c1 = ladder_operator(1, 3)
        assert c1.coefficient(PauliString.from_label("XII")) == pytest.approx(0.5)
        assert c1.coefficient(PauliString.from_label("YII")) == pytest.approx(-0.5j)

    def test_sixth_mode_parity_string(self):
        c6 = ladder_operator(6, 6)
        assert c6.coefficient(PauliString.from_label("ZZZZZX")) == pytest.approx(0.5)
        assert c6.coefficient(PauliString.from_label("ZZZZZY")) == pytest.approx(-0.5j)

    def test_term_product_order(self):
        term = FermionTerm(2.0, ((1, True), (1, False)))
        number_op = jordan_wigner(term, 1)
        # c^dag c = (I + Z) / 2 in this convention
        assert number_op.coefficient(PauliString.from_label("I")) == pytest.approx(1.0)
        assert number_op.coefficient(PauliString.from_label("Z")) == pytest.approx(1.0)

    def test_anticommutators(self):
        rng = np.random.default_rng(4)
        n = 6
        eye = PauliSum.identity(n)
        for _ in range(6):
            i, j = int(rng.integers(1, n + 1)), int(rng.integers(1, n + 1))
            ci = ladder_operator(i, n)
            cj_dag = ladder_operator(j, n, dagger=True)
            anti = ci * cj_dag + cj_dag * ci
            expected = eye if i == j else PauliSum.zero(n)
            assert anti == expected
            cj = ladder_operator(j, n)
            assert (ci * cj + cj * ci) == PauliSum.zero(n)

    def test_hermitian_term_list_gives_real_coefficients(self):
        rng = np.random.default_rng(5)
        terms = quadratic_terms(rng, 4)
        h = jordan_wigner_hamiltonian(terms, 4)
        assert h.is_hermitian

    def test_quadratic_spectrum_matches_fock_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(4):
            n = int(rng.integers(2, 5))
            terms = quadratic_terms(rng, n, count=3)
            h = jordan_wigner_hamiltonian(terms, n)
            qubit_spectrum = np.linalg.eigvalsh(to_dense(h))
            fock_spectrum = np.linalg.eigvalsh(fock_matrix(terms, n))
            assert np.allclose(qubit_spectrum, fock_spectrum, atol=1e-9)

    def test_quartic_spectrum_matches_fock_oracle(self):
        terms = [
            FermionTerm(0.5, ((1, True), (2, True), (3, False), (4, False))),
            FermionTerm(0.5, ((4, True), (3, True), (2, False), (1, False))),
            FermionTerm(1.2, ((1, True), (1, False))),
            FermionTerm(-0.3, ((2, True), (3, False))),
            FermionTerm(-0.3, ((3, True), (2, False))),
        ]
        h = jordan_wigner_hamiltonian(terms, 4)
        assert np.allclose(
            np.linalg.eigvalsh(to_dense(h)),
            np.linalg.eigvalsh(fock_matrix(terms, 4)),
            atol=1e-9,
        )

    def test_mode_out_of_range(self):
        from deepvqe import DimensionError

        with pytest.raises(DimensionError):
            ladder_operator(7, 6)


class TestTruncatedLadder:
    def test_parity_cut_at_subsystem_boundary(self):
        op = truncated_ladder_op(6, (5, 6, 7, 8))
        assert op.n_qubits == 4
        assert op.coefficient(PauliString.from_label("ZXII")) == pytest.approx(0.5)
        assert op.coefficient(PauliString.from_label("ZYII")) == pytest.approx(-0.5j)

    def test_first_mode_of_subsystem_has_no_string(self):
        op = truncated_ladder_op(5, (5, 6, 7, 8))
        assert op.coefficient(PauliString.from_label("XIII")) == pytest.approx(0.5)

    def test_equals_full_operator_with_outside_string_dropped(self):
        subsystem = (5, 6, 7, 8)
        for mode in subsystem:
            full = ladder_operator(mode, 8)
            surgically_cut = PauliSum.from_terms(
                4,
                (
                    (coeff, string.restrict(subsystem))
                    for string, coeff in full.terms()
                ),
            )
            assert truncated_ladder_op(mode, subsystem) == surgically_cut

    def test_anticommutators_within_subsystem(self):
        subsystem = (5, 6, 7, 8)
        eye = PauliSum.identity(4)
        for i in subsystem:
            for j in subsystem:
                a = truncated_ladder_op(i, subsystem)
                b = truncated_ladder_op(j, subsystem, dagger=True)
                expected = eye if i == j else PauliSum.zero(4)
                assert a * b + b * a == expected

    def test_mode_outside_subsystem(self):
        with pytest.raises(SupportError):
            truncated_ladder_op(3, (5, 6, 7, 8))


class TestFermionExcitationSets:
    def test_single_particle_count(self):
        assert len(fermion_excitation_set("ws", tuple(range(1, 7)))) == 13

    def test_single_and_double_count(self):
        assert len(fermion_excitation_set("wd", tuple(range(1, 7)))) == 49

    def test_single_set_is_prefix_of_double_set(self):
        ws = fermion_excitation_set("ws", tuple(range(1, 5))).operators
        wd = fermion_excitation_set("wd", tuple(range(1, 5))).operators
        assert wd[: len(ws)] == ws

    def test_complete_second_order_appends_pair_terms(self):
        base = fermion_excitation_set("wd", tuple(range(1, 5)))
        full = fermion_excitation_set("wd", tuple(range(1, 5)), complete_second_order=True)
        assert len(full) == len(base) + 2 * 6  # C(4,2) pair creations and annihilations


class TestFermionTermIO:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(9)
        terms = quadratic_terms(rng, 4)
        path = tmp_path / "terms.jsonl"
        save_fermion_terms(terms, path)
        assert load_fermion_terms(path) == terms

    def test_missing_conjugate_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        save_fermion_terms([FermionTerm(0.5 + 0.1j, ((1, True), (2, False)))], path)
        with pytest.raises(ValidationError, match="conjugate"):
            load_fermion_terms(path)

    def test_conjugate_pair_accepted(self, tmp_path):
        term = FermionTerm(0.5 + 0.1j, ((1, True), (2, False)))
        path = tmp_path / "ok.jsonl"
        save_fermion_terms([term, term.conjugate()], path)
        assert len(load_fermion_terms(path)) == 2

    def test_momentum_conservation_enforced(self, tmp_path):
        k = 2 * np.pi / 3
        bad = FermionTerm(
            1.0,
            ((1, True), (2, True), (3, False), (4, False)),
            momenta=(k, k, k, 0.0),
        )
        path = tmp_path / "bad_k.jsonl"
        save_fermion_terms([bad, bad.conjugate()], path)
        with pytest.raises(ValidationError, match="momentum"):
            load_fermion_terms(path)

    def test_momentum_conserving_term_accepted(self, tmp_path):
        k = 2 * np.pi / 3
        good = FermionTerm(
            1.0,
            ((1, True), (2, True), (3, False), (4, False)),
            momenta=(k, 2 * k, 3 * k, 0.0),  # balance = 0 mod 2 pi
        )
        path = tmp_path / "good_k.jsonl"
        save_fermion_terms([good, good.conjugate()], path)
        assert len(load_fermion_terms(path)) == 2

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "broken.jsonl"
        path.write_text('{"re": 1.0, "im": 0.0, "ops": [[1, 1], [1, 0]]}\nnot json\n')
        with pytest.raises(ValidationError, match=":2"):
            load_fermion_terms(path)


class TestMomentumPartition:
    def test_three_k_points_two_subsystems(self):
        p = momentum_partition(3, 4, 6)
        assert p.subsystems == (tuple(range(1, 7)), tuple(range(7, 13)))

    def test_single_subsystem(self):
        p = momentum_partition(1, 4, 4)
        assert p.subsystems == ((1, 2, 3, 4),)

    def test_indivisible_rejected(self):
        with pytest.raises(PartitionError):
            momentum_partition(3, 4, 5)
