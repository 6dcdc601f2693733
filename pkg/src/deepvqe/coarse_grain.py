"""Restricted local bases: Gram matrices, orthonormalization and matrix
elements of subsystem operators.

Given reference states |psi_m> of a subsystem and excitation operators P_k
(the first always the identity), the raw basis is {P_k |psi_m>} with flat
index m * K_ops + k.  Orthonormalizing its Gram matrix yields a transform S
with S^dag G S = I, and any local operator A projects to the K x K matrix
S^dag R S with R the raw matrix of <psi_m| P_k^dag A P_l |psi_n> values.

Raw entries are evaluated by expanding P_k^dag A P_l into Pauli strings and
summing cached per-string transition amplitudes, so no per-element state
copies are made and every distinct Pauli string is measured once per
reference pair.  Matrix entries are independent and may be evaluated
concurrently against the shared read-only reference states.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBasisError, DimensionError, SupportError, ValidationError
from .pauli import PauliSum, apply_string
from .statevector import StateVector, overlap

RANK_TOLERANCE = 1e-8


@dataclass(frozen=True)
class ExcitationSet:
    """Ordered excitation operators of one subsystem, identity first.

    Operators are expressed on the subsystem's local register (qubit 1 is the
    subsystem's first qubit), so their support is confined by construction.
    """

    subsystem: int
    operators: tuple[PauliSum, ...]

    def __post_init__(self):
        if not self.operators:
            raise ValidationError("excitation set must contain at least the identity")
        first = self.operators[0]
        if first != PauliSum.identity(first.n_qubits):
            raise ValidationError("operators[0] must be the identity")
        for op in self.operators:
            if op.n_qubits != first.n_qubits:
                raise DimensionError("all excitation operators must share the register size")

    @property
    def n_qubits(self) -> int:
        return self.operators[0].n_qubits

    def __len__(self) -> int:
        return len(self.operators)


@dataclass
class LocalBasis:
    """Orthonormalized restricted basis of one subsystem.

    ``transform`` is the (raw dimension x rank) matrix S satisfying
    S^dag G S = I; ``rank`` is the effective dimension K after discarding
    Gram eigenvalues below the relative tolerance.
    """

    subsystem: int
    references: list[StateVector]
    excitations: ExcitationSet
    transform: np.ndarray
    rank: int

    @property
    def raw_dimension(self) -> int:
        return len(self.references) * len(self.excitations)

    def to_json_dict(self) -> dict:
        return {
            "subsystem": self.subsystem,
            "k": self.rank,
            "s_re": self.transform.real.flatten().tolist(),
            "s_im": self.transform.imag.flatten().tolist(),
            "raw_dimension": self.raw_dimension,
            "excitations": [op.to_json_dict() for op in self.excitations.operators],
            "references": [
                {"re": r.amplitudes.real.tolist(), "im": r.amplitudes.imag.tolist()}
                for r in self.references
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "LocalBasis":
        ops = tuple(PauliSum.from_json_dict(d) for d in data["excitations"])
        exc = ExcitationSet(data["subsystem"], ops)
        refs = [
            StateVector(ops[0].n_qubits, np.array(r["re"]) + 1j * np.array(r["im"]))
            for r in data["references"]
        ]
        raw, k = data["raw_dimension"], data["k"]
        s = (np.array(data["s_re"]) + 1j * np.array(data["s_im"])).reshape(raw, k)
        return cls(data["subsystem"], refs, exc, s, k)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "LocalBasis":
        return cls.from_json_dict(json.loads(text))


class _TransitionCache:
    """Per-string transition amplitudes <psi_m|P|psi_n> with conjugate reuse."""

    def __init__(self, refs: list[StateVector]):
        self.refs = refs
        self.n_qubits = refs[0].n_qubits
        self._cache: dict[tuple[int, int, int, int], complex] = {}

    def value(self, m: int, n: int, op: PauliSum) -> complex:
        total = 0.0 + 0.0j
        for string, coeff in op.terms():
            key = (m, n, string.x_mask, string.z_mask)
            amp = self._cache.get(key)
            if amp is None:
                swapped = self._cache.get((n, m, string.x_mask, string.z_mask))
                if swapped is not None:
                    amp = swapped.conjugate()  # strings are hermitian
                else:
                    amp = complex(
                        np.vdot(
                            self.refs[m].amplitudes,
                            apply_string(
                                string.x_mask,
                                string.z_mask,
                                self.n_qubits,
                                self.refs[n].amplitudes,
                            ),
                        )
                    )
                self._cache[key] = amp
            total += coeff * amp
        return total


def _normalize_refs(refs) -> list[StateVector]:
    if isinstance(refs, StateVector):
        refs = [refs]
    refs = list(refs)
    if not refs:
        raise ValidationError("at least one reference state is required")
    for r in refs:
        if r.n_qubits != refs[0].n_qubits:
            raise DimensionError("reference states must share the register size")
        if abs(r.norm - 1.0) > 1e-8:
            raise ValidationError("reference states must be normalized")
    return refs


def _operators(ops) -> list[PauliSum]:
    return list(getattr(ops, "operators", ops))


def _raw_matrix(refs: list[StateVector], operators: list[PauliSum], middle: PauliSum | None):
    """Raw basis matrix of <psi_m| P_k^dag [A] P_l |psi_n>, flat index m*K+k."""
    n_ops, n_refs = len(operators), len(refs)
    dim = n_refs * n_ops
    cache = _TransitionCache(refs)
    out = np.zeros((dim, dim), dtype=complex)
    hermitian = middle is None or middle.is_hermitian
    for k, op_k in enumerate(operators):
        left = op_k.dagger() if middle is None else op_k.dagger() * middle
        for l in range(k if hermitian else 0, n_ops):
            product = left * operators[l]
            for m in range(n_refs):
                for n in range(n_refs):
                    if hermitian and k == l and n < m:
                        continue
                    value = cache.value(m, n, product)
                    out[m * n_ops + k, n * n_ops + l] = value
                    if hermitian:
                        out[n * n_ops + l, m * n_ops + k] = value.conjugate()
    if hermitian:
        out = 0.5 * (out + out.conj().T)
    return out


def gram_matrix(refs, ops) -> np.ndarray:
    """Overlap matrix of the raw basis {P_k |psi_m>}; hermitian PSD.

    Entry ((m,k),(n,l)) equals <psi_m| P_k^dag P_l |psi_n> with the flat
    row index m * K_ops + k.
    """
    refs = _normalize_refs(refs)
    operators = _operators(ops)
    for op in operators:
        if op.n_qubits != refs[0].n_qubits:
            raise DimensionError("excitation operators and references differ in size")
    return _raw_matrix(refs, operators, None)


def orthonormalize(gram: np.ndarray, tol: float = RANK_TOLERANCE):
    """Canonical orthonormalization of a hermitian PSD Gram matrix.

    Eigendecomposes G = U diag(w) U^dag, keeps eigenpairs with
    w > tol * max(w), and returns ``(S, K)`` with S = U_kept diag(w_kept^-1/2)
    so that S^dag G S = I_K.  Columns are ordered by decreasing Gram
    eigenvalue, which fixes the basis deterministically.
    """
    gram = np.asarray(gram, dtype=complex)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise DimensionError("Gram matrix must be square")
    if np.max(np.abs(gram - gram.conj().T)) > 1e-10:
        raise ValidationError("Gram matrix must be hermitian within 1e-10")
    w, u = np.linalg.eigh(gram)
    largest = float(w[-1]) if w.size else 0.0
    if largest <= 0:
        raise DegenerateBasisError("all Gram eigenvalues vanish; raw basis has rank zero")
    keep = np.where(w > tol * largest)[0][::-1]  # descending eigenvalue order
    if keep.size == 0:
        raise DegenerateBasisError("all Gram eigenvalues below tolerance")
    s = u[:, keep] / np.sqrt(w[keep])
    return s, int(keep.size)


def matrix_elements(refs, ops, s: np.ndarray, a: PauliSum) -> np.ndarray:
    """K x K matrix of a local operator in the orthonormalized basis.

    ``s`` must come from :func:`orthonormalize` of the same (refs, ops); the
    result is hermitian whenever ``a`` is.
    """
    refs = _normalize_refs(refs)
    operators = _operators(ops)
    if a.n_qubits != refs[0].n_qubits:
        raise SupportError(
            f"operator acts on {a.n_qubits} qubits but the subsystem has {refs[0].n_qubits}"
        )
    raw = _raw_matrix(refs, operators, a)
    out = s.conj().T @ raw @ s
    if a.is_hermitian:
        out = 0.5 * (out + out.conj().T)
    return out


def build_local_basis(refs, ops, tol: float = RANK_TOLERANCE) -> LocalBasis:
    """End-to-end restricted basis: Gram, rank truncation, transform."""
    refs = _normalize_refs(refs)
    operators = _operators(ops)
    exc = ops if isinstance(ops, ExcitationSet) else ExcitationSet(0, tuple(operators))
    gram = gram_matrix(refs, operators)
    s, rank = orthonormalize(gram, tol)
    return LocalBasis(exc.subsystem, refs, exc, s, rank)


def multi_state_basis(refs, ops, tol: float = RANK_TOLERANCE) -> LocalBasis:
    """Restricted basis over several orthonormal reference states.

    The raw basis is the union of {P_k |psi_m>} over all references, so the
    Gram and matrix elements include the off-diagonal reference blocks.
    References must be pairwise orthonormal (e.g. SSVQE outputs).
    """
    refs = _normalize_refs(refs)
    for i in range(len(refs)):
        for j in range(i + 1, len(refs)):
            if abs(overlap(refs[i], refs[j])) > 1e-8:
                raise ValidationError("reference states must be pairwise orthonormal")
    return build_local_basis(refs, ops, tol)
