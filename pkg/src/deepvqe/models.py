"""Problem builders: spin chains, subsystem partitions, excitation sets and
second-quantized fermionic models mapped to qubits.

All builders are pure functions with no shared mutable state.  Subsystem
operators handed to the coarse-graining layer are always expressed on the
subsystem's local register (local qubit 1 is the subsystem's first global
qubit).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .coarse_grain import ExcitationSet
from .errors import (
    ArityError,
    DimensionError,
    PartitionError,
    SupportError,
    ValidationError,
)
from .pauli import PauliString, PauliSum


@dataclass(frozen=True)
class Partition:
    """Ordered split of qubits 1..n_total into disjoint contiguous subsystems."""

    n_total: int
    subsystems: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = []
        for block in self.subsystems:
            if not block:
                raise PartitionError("empty subsystem")
            if list(block) != list(range(block[0], block[-1] + 1)):
                raise PartitionError(f"subsystem {block} is not contiguous ascending")
            seen.extend(block)
        if seen != list(range(1, self.n_total + 1)):
            raise PartitionError("subsystems must disjointly cover qubits 1..n_total in order")

    @classmethod
    def from_sizes(cls, sizes: list[int]) -> "Partition":
        blocks, start = [], 1
        for s in sizes:
            if s < 1:
                raise PartitionError("subsystem sizes must be positive")
            blocks.append(tuple(range(start, start + s)))
            start += s
        return cls(start - 1, tuple(blocks))

    @property
    def n_subsystems(self) -> int:
        return len(self.subsystems)

    def size(self, i: int) -> int:
        return len(self.subsystems[i])

    def offset(self, i: int) -> int:
        return self.subsystems[i][0] - 1

    def subsystem_of(self, qubit: int) -> int:
        for i, block in enumerate(self.subsystems):
            if block[0] <= qubit <= block[-1]:
                return i
        raise PartitionError(f"qubit {qubit} outside partition")


@dataclass(frozen=True)
class InterTerm:
    """Pairwise interaction nu * V on subsystem i times W on subsystem j,
    with V and W on the local registers of their subsystems."""

    i: int
    j: int
    nu: complex
    v: PauliSum
    w: PauliSum


# -- spin chain --------------------------------------------------------------


def heisenberg_hamiltonian(n_sites: int) -> PauliSum:
    """Open-boundary antiferromagnetic Heisenberg chain, unit coupling."""
    if n_sites < 2:
        raise DimensionError("chain needs at least two sites")
    terms = []
    for site in range(1, n_sites):
        for letter in "XYZ":
            a = PauliString.single(n_sites, site, letter)
            b = PauliString.single(n_sites, site + 1, letter)
            terms.append((1.0, PauliString(n_sites, a.x_mask | b.x_mask, a.z_mask | b.z_mask)))
    return PauliSum.from_terms(n_sites, terms)


def split_hamiltonian(h: PauliSum, partition: Partition):
    """Separate a Pauli sum into per-subsystem parts and pairwise couplings.

    Identity terms are folded into the first subsystem's part.  A string
    whose support touches three or more subsystems cannot be written as a
    pairwise coupling and raises :class:`ArityError`.
    """
    if h.n_qubits != partition.n_total:
        raise DimensionError("Hamiltonian size does not match the partition")
    intra = [PauliSum.zero(partition.size(i)) for i in range(partition.n_subsystems)]
    inter: list[InterTerm] = []
    for string, coeff in h.terms():
        touched = sorted({partition.subsystem_of(q) for q in string.support})
        if len(touched) == 0:
            intra[0] = intra[0] + PauliSum.identity(partition.size(0), coeff)
        elif len(touched) == 1:
            i = touched[0]
            local = string.restrict(partition.subsystems[i])
            intra[i] = intra[i] + PauliSum.from_terms(partition.size(i), [(coeff, local)])
        elif len(touched) == 2:
            i, j = touched
            v = string.restrict(partition.subsystems[i])
            w = string.restrict(partition.subsystems[j])
            inter.append(
                InterTerm(
                    i,
                    j,
                    complex(coeff),
                    PauliSum.from_terms(partition.size(i), [(1.0, v)]),
                    PauliSum.from_terms(partition.size(j), [(1.0, w)]),
                )
            )
        else:
            raise ArityError(
                f"term {string.label} couples subsystems {touched}; only pairwise supported"
            )
    return intra, inter


def assemble_partitioned(partition: Partition, intra, inter) -> PauliSum:
    """Inverse of :func:`split_hamiltonian`: lift local parts back to the
    global register and sum."""
    total = PauliSum.zero(partition.n_total)
    for i, h in enumerate(intra):
        total = total + h.embed(partition.n_total, partition.offset(i))
    for term in inter:
        v = term.v.embed(partition.n_total, partition.offset(term.i))
        w = term.w.embed(partition.n_total, partition.offset(term.j))
        total = total + term.nu * (v * w)
    return total


def heisenberg_chain(n_sites: int, partition: Partition):
    """Heisenberg chain split into intra parts and boundary-bond couplings."""
    if partition.n_total != n_sites:
        raise PartitionError("partition does not cover the chain")
    return split_hamiltonian(heisenberg_hamiltonian(n_sites), partition)


SPIN_EXCITATION_KINDS = ("w", "w1", "w2")


def spin_excitation_set(kind: str, partition: Partition, subsystem: int) -> ExcitationSet:
    """Identity plus single-site Pauli excitations of one subsystem.

    ``w``  : X, Y, Z on every site (3 * N_qubit + 1 operators).
    ``w1`` : X, Y, Z only on sites adjacent to a neighboring subsystem.
    ``w2`` : X, Y, Z on every site except the right edge (3 * N_qubit - 2);
             the omitted site compensates the linear dependence that total-spin
             symmetry induces among single-site excitations of a singlet.
    """
    kind = kind.lower()
    if kind not in SPIN_EXCITATION_KINDS:
        raise ValidationError(f"kind must be one of {SPIN_EXCITATION_KINDS}")
    m = partition.size(subsystem)
    if kind == "w":
        sites = list(range(1, m + 1))
    elif kind == "w2":
        sites = list(range(1, m))
    else:
        sites = []
        if subsystem > 0:
            sites.append(1)
        if subsystem < partition.n_subsystems - 1 and (m > 1 or not sites):
            sites.append(m)
    ops = [PauliSum.identity(m)]
    for site in sites:
        for letter in "XYZ":
            ops.append(PauliSum.single(m, site, letter))
    return ExcitationSet(subsystem, tuple(ops))


# -- fermions ----------------------------------------------------------------


@dataclass(frozen=True)
class FermionTerm:
    """Coefficient times an ordered product of ladder operators.

    ``factors`` lists (mode, dagger) pairs left to right; ``momenta``
    optionally carries one crystalline-momentum label per factor.
    """

    coefficient: complex
    factors: tuple[tuple[int, bool], ...]
    momenta: tuple[float, ...] | None = None

    def __post_init__(self):
        for mode, _ in self.factors:
            if mode < 1:
                raise ValidationError("mode indices are 1-based positive integers")
        if self.momenta is not None and len(self.momenta) != len(self.factors):
            raise ValidationError("one momentum label per ladder factor required")

    def conjugate(self) -> "FermionTerm":
        factors = tuple((m, not d) for m, d in reversed(self.factors))
        momenta = tuple(reversed(self.momenta)) if self.momenta is not None else None
        return FermionTerm(self.coefficient.conjugate(), factors, momenta)

    def momentum_balance(self) -> float | None:
        """Sum of creation momenta minus annihilation momenta; None if unlabeled."""
        if self.momenta is None:
            return None
        return sum(k if d else -k for (_, d), k in zip(self.factors, self.momenta))


def _term_to_json(term: FermionTerm) -> dict:
    data = {
        "re": term.coefficient.real,
        "im": term.coefficient.imag,
        "ops": [[mode, 1 if dagger else 0] for mode, dagger in term.factors],
    }
    if term.momenta is not None:
        data["k"] = list(term.momenta)
    return data


def _term_from_json(data: dict) -> FermionTerm:
    coeff = complex(data["re"], data.get("im", 0.0))
    factors = tuple((int(m), bool(d)) for m, d in data["ops"])
    momenta = tuple(float(k) for k in data["k"]) if "k" in data else None
    return FermionTerm(coeff, factors, momenta)


def save_fermion_terms(terms, path):
    with open(path, "w") as fh:
        for term in terms:
            fh.write(json.dumps(_term_to_json(term)) + "\n")


def load_fermion_terms(path) -> list[FermionTerm]:
    """Read a JSON-lines term file and validate it.

    Every term's hermitian conjugate must appear with the conjugate
    coefficient (aggregated over duplicate lines), and momentum-labeled terms
    must conserve crystalline momentum modulo 2*pi.
    """
    terms: list[FermionTerm] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                term = _term_from_json(data)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"{path}:{lineno}: cannot parse term ({exc})") from exc
            balance = term.momentum_balance()
            if balance is not None:
                remainder = balance % (2 * np.pi)
                if min(remainder, 2 * np.pi - remainder) > 1e-8:
                    raise ValidationError(
                        f"{path}:{lineno}: crystalline momentum not conserved "
                        f"(balance {balance:.6f} is not a multiple of 2*pi)"
                    )
            terms.append(term)
    _check_hermitian_closure(terms, path)
    return terms


def _check_hermitian_closure(terms: list[FermionTerm], origin: str = "term list"):
    aggregated: dict[tuple, complex] = {}
    for term in terms:
        key = (term.factors, term.momenta)
        aggregated[key] = aggregated.get(key, 0.0) + term.coefficient
    for (factors, momenta), coeff in aggregated.items():
        conj = FermionTerm(coeff, factors, momenta).conjugate()
        partner = aggregated.get((conj.factors, conj.momenta))
        if partner is None or abs(partner - conj.coefficient) > 1e-10 * max(1.0, abs(coeff)):
            raise ValidationError(
                f"{origin}: hermitian conjugate of term {factors} missing or mismatched"
            )


def _ladder_terms(position: int, n_qubits: int, z_positions, dagger: bool) -> PauliSum:
    """(prod Z) (X -+ iY)/2 at the given 1-based position of a register."""
    zz = 0
    for q in z_positions:
        zz |= 1 << (q - 1)
    x_string = PauliString(n_qubits, 1 << (position - 1), zz)
    y_string = PauliString(n_qubits, 1 << (position - 1), zz | 1 << (position - 1))
    sign = 0.5j if dagger else -0.5j
    return PauliSum.from_terms(n_qubits, [(0.5, x_string), (sign, y_string)])


def ladder_operator(mode: int, n_modes: int, dagger: bool = False) -> PauliSum:
    """Jordan-Wigner image of one ladder operator on the full register:
    c_j = Z_1 ... Z_{j-1} (X_j - i Y_j)/2 and the conjugate for c_j^dag."""
    if not 1 <= mode <= n_modes:
        raise DimensionError(f"mode {mode} outside 1..{n_modes}")
    return _ladder_terms(mode, n_modes, range(1, mode), dagger)


def jordan_wigner(term: FermionTerm, n_modes: int) -> PauliSum:
    """Qubit representation of one second-quantized term."""
    result = PauliSum.identity(n_modes, term.coefficient)
    for mode, dagger in term.factors:
        result = result * ladder_operator(mode, n_modes, dagger)
    return result


def jordan_wigner_hamiltonian(terms, n_modes: int) -> PauliSum:
    total = PauliSum.zero(n_modes)
    for term in terms:
        total = total + jordan_wigner(term, n_modes)
    return total


def truncated_ladder_op(mode: int, subsystem: tuple[int, ...], dagger: bool = False) -> PauliSum:
    """Ladder operator with the parity string cut at the subsystem boundary.

    Equivalent to the full Jordan-Wigner operator with every Z factor outside
    the subsystem dropped, expressed on the subsystem's local register.
    """
    subsystem = tuple(sorted(subsystem))
    if mode not in subsystem:
        raise SupportError(f"mode {mode} lies outside subsystem {subsystem}")
    position = subsystem.index(mode) + 1
    z_local = [i + 1 for i, q in enumerate(subsystem) if q < mode]
    return _ladder_terms(position, len(subsystem), z_local, dagger)


FERMION_EXCITATION_KINDS = ("ws", "wd")


def fermion_excitation_set(
    kind: str,
    subsystem: tuple[int, ...],
    subsystem_id: int = 0,
    complete_second_order: bool = False,
) -> ExcitationSet:
    """Single- (and optionally double-) particle excitations of one subsystem.

    ``ws`` holds the identity plus the truncated c_j and c_j^dag for every
    mode (2 * N_qubit + 1 operators).  ``wd`` adds every c_j^dag c_k product,
    giving (N_qubit + 1)^2 operators; with ``complete_second_order`` the pair
    creation/annihilation products c_j c_k and c_j^dag c_k^dag (j < k) are
    appended as well, which makes the spanned space nested above any
    lower-order choice.
    """
    kind = kind.lower()
    if kind not in FERMION_EXCITATION_KINDS:
        raise ValidationError(f"kind must be one of {FERMION_EXCITATION_KINDS}")
    subsystem = tuple(sorted(subsystem))
    m = len(subsystem)
    ops: list[PauliSum] = [PauliSum.identity(m)]
    for mode in subsystem:
        ops.append(truncated_ladder_op(mode, subsystem, dagger=False))
        ops.append(truncated_ladder_op(mode, subsystem, dagger=True))
    if kind == "wd":
        create = {mode: truncated_ladder_op(mode, subsystem, dagger=True) for mode in subsystem}
        destroy = {mode: truncated_ladder_op(mode, subsystem, dagger=False) for mode in subsystem}
        for j in subsystem:
            for k in subsystem:
                ops.append(create[j] * destroy[k])
        if complete_second_order:
            for a in range(m):
                for b in range(a + 1, m):
                    j, k = subsystem[a], subsystem[b]
                    ops.append(destroy[j] * destroy[k])
                    ops.append(create[j] * create[k])
    return ExcitationSet(subsystem_id, tuple(ops))


def momentum_partition(n_k: int, orbitals_per_k: int, n_qubit_per_subsystem: int) -> Partition:
    """Group qubits ordered by ascending crystalline momentum into contiguous
    subsystems of fixed size.

    Qubit (k_a, p) sits at global index (a - 1) * orbitals_per_k + p, so
    neighboring qubits carry neighboring momenta and each subsystem collects
    modes of similar momentum.
    """
    total = n_k * orbitals_per_k
    if total % n_qubit_per_subsystem:
        raise PartitionError(
            f"{total} qubits cannot be split into subsystems of {n_qubit_per_subsystem}"
        )
    return Partition.from_sizes([n_qubit_per_subsystem] * (total // n_qubit_per_subsystem))
