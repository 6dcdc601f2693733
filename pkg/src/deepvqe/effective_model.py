"""Coarse-grained model assembly, penalty-padded qubit embedding and the
block decomposition that certifies spectrum preservation.

The coarse-grained Hamiltonian is stored as per-subsystem K_i x K_i blocks
plus pairwise coupling triples (nu, V, W); each stored coupling represents
the term nu * V_i (x) W_j exactly once, so hermiticity of the assembled total
requires each triple to be hermitian on its own (real nu with hermitian V, W)
or to appear together with its conjugate triple.

Embedding pads every subsystem to ``padded_dims[i]`` levels (default: the
next power of two, at least 2): blocks become H_i (+) lambda_i * I on the
auxiliary levels, coupling factors are padded with zero blocks, and identity
factors on other subsystems span their full padded space.  The block
decomposition enumerates the invariant sectors of the padded model by the
subset D of subsystems confined to their auxiliary levels; the union of the
sector spectra equals the spectrum of the embedded operator exactly.

Assembly of independent blocks is parallelizable; instances are immutable
after construction and safe to share.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError
from .pauli import PauliSum, dense_to_pauli_sum
from .coarse_grain import LocalBasis, matrix_elements


def _dense_op_norm(m: np.ndarray) -> float:
    if np.max(np.abs(m - m.conj().T)) < 1e-12:
        return float(np.max(np.abs(np.linalg.eigvalsh(m)))) if m.size else 0.0
    return float(np.linalg.norm(m, 2))


@dataclass(frozen=True)
class Coupling:
    """One pairwise interaction term nu * V on subsystem i times W on j."""

    i: int
    j: int
    nu: complex
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        if self.i == self.j:
            raise ValidationError("coupling endpoints must be distinct subsystems")


class EffectiveHamiltonian:
    """Per-subsystem blocks plus pairwise couplings of the coarse-grained model."""

    def __init__(self, blocks: list[np.ndarray], couplings: list[Coupling]):
        self.blocks = [np.asarray(b, dtype=complex) for b in blocks]
        self.dims = tuple(b.shape[0] for b in self.blocks)
        for b in self.blocks:
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise DimensionError("subsystem blocks must be square")
            if np.max(np.abs(b - b.conj().T)) > 1e-10:
                raise ValidationError("subsystem blocks must be hermitian within 1e-10")
        self.couplings = list(couplings)
        n = len(self.blocks)
        for c in self.couplings:
            if not (0 <= c.i < n and 0 <= c.j < n):
                raise DimensionError("coupling references an unknown subsystem")
            if c.v.shape != (self.dims[c.i],) * 2 or c.w.shape != (self.dims[c.j],) * 2:
                raise DimensionError("coupling factor dimensions do not match the blocks")

    @property
    def n_subsystems(self) -> int:
        return len(self.blocks)

    @property
    def total_dimension(self) -> int:
        return int(np.prod(self.dims))

    def _lift(self, mat: np.ndarray, index: int, dims: tuple[int, ...]) -> np.ndarray:
        out = np.array([[1.0 + 0.0j]])
        for pos, d in enumerate(dims):
            out = np.kron(out, mat if pos == index else np.eye(d))
        return out

    def to_dense(self) -> np.ndarray:
        """Full Pi K_i dimensional matrix; validates hermiticity to 1e-9."""
        dims = self.dims
        total = sum(self._lift(b, i, dims) for i, b in enumerate(self.blocks))
        for c in self.couplings:
            total = total + c.nu * (self._lift(c.v, c.i, dims) @ self._lift(c.w, c.j, dims))
        if np.max(np.abs(total - total.conj().T)) > 1e-9:
            raise ValidationError("assembled model is not hermitian; check coupling triples")
        return total

    def spectrum(self, k: int | None = None) -> np.ndarray:
        vals = np.linalg.eigvalsh(self.to_dense())
        return vals if k is None else vals[:k]

    # -- serialization -------------------------------------------------

    def to_json_dict(self) -> dict:
        def cplx(m):
            return {"re": np.real(m).flatten().tolist(), "im": np.imag(m).flatten().tolist()}

        return {
            "dims": list(self.dims),
            "blocks": [cplx(b) for b in self.blocks],
            "couplings": [
                {
                    "i": c.i,
                    "j": c.j,
                    "nu_re": c.nu.real,
                    "nu_im": c.nu.imag,
                    "v": cplx(c.v),
                    "w": cplx(c.w),
                }
                for c in self.couplings
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "EffectiveHamiltonian":
        dims = data["dims"]

        def mat(entry, d):
            return (np.array(entry["re"]) + 1j * np.array(entry["im"])).reshape(d, d)

        blocks = [mat(b, d) for b, d in zip(data["blocks"], dims)]
        couplings = [
            Coupling(
                c["i"],
                c["j"],
                complex(c["nu_re"], c["nu_im"]),
                mat(c["v"], dims[c["i"]]),
                mat(c["w"], dims[c["j"]]),
            )
            for c in data["couplings"]
        ]
        return cls(blocks, couplings)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "EffectiveHamiltonian":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class PenaltyVector:
    """Energy shifts applied to the auxiliary levels of each subsystem."""

    lambdas: tuple[float, ...]
    target_level: int = 0
    gap_estimate: float = 0.0

    def __post_init__(self):
        if any(l < 0 for l in self.lambdas):
            raise ValidationError("penalty shifts must be nonnegative")

    @classmethod
    def zero(cls, n_subsystems: int) -> "PenaltyVector":
        return cls((0.0,) * n_subsystems)


def assemble_effective(partition, bases: list[LocalBasis], intra, inter) -> EffectiveHamiltonian:
    """Project intra-subsystem operators and coupling factors onto the bases.

    ``intra`` is one local PauliSum per subsystem; ``inter`` is a list of
    pairwise terms carrying (i, j, nu, V, W) with local PauliSum factors
    (see :mod:`deepvqe.models`).  Interactions touching three or more
    subsystems are rejected upstream when the model is split.
    """
    if len(bases) != len(intra):
        raise DimensionError("need one local basis per subsystem")
    blocks = [
        matrix_elements(b.references, b.excitations, b.transform, h)
        for b, h in zip(bases, intra)
    ]
    couplings = []
    for term in inter:
        bi, bj = bases[term.i], bases[term.j]
        vt = matrix_elements(bi.references, bi.excitations, bi.transform, term.v)
        wt = matrix_elements(bj.references, bj.excitations, bj.transform, term.w)
        couplings.append(Coupling(term.i, term.j, complex(term.nu), vt, wt))
    return EffectiveHamiltonian(blocks, couplings)


def extensiveness(eff: EffectiveHamiltonian, i: int) -> float:
    """Norm bound on every stored term touching subsystem i.

    Returns ||H_i||_op plus the sum of |nu| * ||V||_op * ||W||_op over all
    couplings with i as an endpoint; any penalty exceeding this bound keeps
    the ground state of the padded model intact.
    """
    if not 0 <= i < eff.n_subsystems:
        raise DimensionError(f"no subsystem {i}")
    total = _dense_op_norm(eff.blocks[i])
    for c in eff.couplings:
        if i in (c.i, c.j):
            total += abs(c.nu) * _dense_op_norm(c.v) * _dense_op_norm(c.w)
    return total


PENALTY_MODES = ("ground", "excited", "unconditional")


def penalty_bounds(
    eff: EffectiveHamiltonian,
    n: int = 0,
    gap_estimate: float = 0.0,
    mode: str = "excited",
) -> PenaltyVector:
    """Sufficient penalty shifts for preserving the low spectrum.

    ``ground`` guards the ground state only; ``excited`` additionally adds a
    gap estimate (an upper bound on E_n - E_0 of the coarse-grained model) so
    levels 0..n survive; ``unconditional`` needs no gap knowledge and keeps
    the entire Pi K_i spectrum as the lowest eigenvalues.  A small relative
    margin is added because the underlying sufficient conditions are strict
    inequalities.
    """
    if mode not in PENALTY_MODES:
        raise ValidationError(f"mode must be one of {PENALTY_MODES}")
    if mode == "excited" and gap_estimate < 0:
        raise ValidationError("gap estimate must be nonnegative")
    ext = [extensiveness(eff, i) for i in range(eff.n_subsystems)]
    if mode == "ground":
        bounds = ext
    elif mode == "excited":
        bounds = [e + gap_estimate for e in ext]
    else:
        total = 2.0 * sum(ext)
        bounds = [e + total for e in ext]
    lambdas = tuple(b + 1e-6 * max(1.0, abs(b)) for b in bounds)
    return PenaltyVector(lambdas, target_level=n, gap_estimate=gap_estimate)


def _padded_dims(eff: EffectiveHamiltonian, padded_dims=None) -> tuple[int, ...]:
    if padded_dims is None:
        return tuple(1 << max(1, (k - 1).bit_length()) for k in eff.dims)
    padded_dims = tuple(int(d) for d in padded_dims)
    if len(padded_dims) != eff.n_subsystems:
        raise DimensionError("one padded dimension per subsystem required")
    for d, k in zip(padded_dims, eff.dims):
        if d < k:
            raise DimensionError("padded dimension smaller than the block")
    return padded_dims


def _pad(mat: np.ndarray, dim: int, diagonal: float = 0.0) -> np.ndarray:
    k = mat.shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    out[:k, :k] = mat
    if dim > k and diagonal:
        out[k:, k:] = diagonal * np.eye(dim - k)
    return out


class EmbeddedOperator:
    """Padded coarse-grained model with a fast tensor-contraction action.

    Mathematically identical to the Pauli sum from :func:`embed_to_qubits`
    (when every padded dimension is a power of two) but applies to a state
    in O(dim * max K) instead of per-Pauli-term work.
    """

    def __init__(self, eff: EffectiveHamiltonian, penalties: PenaltyVector, padded_dims=None):
        if len(penalties.lambdas) != eff.n_subsystems:
            raise DimensionError("one penalty per subsystem required")
        self.dims = _padded_dims(eff, padded_dims)
        self.blocks = [
            _pad(b, d, diagonal=lam)
            for b, d, lam in zip(eff.blocks, self.dims, penalties.lambdas)
        ]
        self.couplings = [
            Coupling(c.i, c.j, c.nu, _pad(c.v, self.dims[c.i]), _pad(c.w, self.dims[c.j]))
            for c in eff.couplings
        ]
        self.is_hermitian = True

    @property
    def total_dimension(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_qubits(self) -> int:
        bits = [d.bit_length() - 1 for d in self.dims]
        if any(1 << b != d for b, d in zip(bits, self.dims)):
            raise DimensionError("padded dimensions are not powers of two")
        return sum(bits)

    def _contract(self, mat: np.ndarray, index: int, tensor: np.ndarray) -> np.ndarray:
        moved = np.tensordot(mat, tensor, axes=([1], [index]))
        return np.moveaxis(moved, 0, index)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        if vec.shape != (self.total_dimension,):
            raise DimensionError("vector length does not match the embedded dimension")
        tensor = vec.reshape(self.dims)
        out = np.zeros_like(tensor, dtype=complex)
        for i, block in enumerate(self.blocks):
            out += self._contract(block, i, tensor)
        for c in self.couplings:
            partial = self._contract(c.w, c.j, tensor)
            out += c.nu * self._contract(c.v, c.i, partial)
        return out.reshape(-1)

    def to_dense(self) -> np.ndarray:
        dim = self.total_dimension
        out = np.zeros((dim, dim), dtype=complex)
        eye = np.eye(dim, dtype=complex)
        for col in range(dim):
            out[:, col] = self.apply(eye[:, col])
        return out

    def to_pauli_sum(self) -> PauliSum:
        """Qubit representation: each padded block expanded in Pauli strings."""
        n_total = self.n_qubits
        offsets = np.cumsum([0] + [d.bit_length() - 1 for d in self.dims])
        total = PauliSum.zero(n_total)
        for i, block in enumerate(self.blocks):
            total = total + dense_to_pauli_sum(block).embed(n_total, int(offsets[i]))
        for c in self.couplings:
            v = dense_to_pauli_sum(c.v).embed(n_total, int(offsets[c.i]))
            w = dense_to_pauli_sum(c.w).embed(n_total, int(offsets[c.j]))
            total = total + c.nu * (v * w)
        return total


def embed_to_qubits(eff: EffectiveHamiltonian, penalties: PenaltyVector) -> PauliSum:
    """Penalty-padded qubit Hamiltonian on sum_i ceil(log2 K_i) qubits.

    Every subsystem block is padded to 2^ceil(log2 K_i) levels (at least 2)
    with the penalty shift on the auxiliary diagonal, coupling factors are
    padded with zeros, and each padded block is re-expressed in Pauli strings
    on its qubit group.
    """
    return EmbeddedOperator(eff, penalties).to_pauli_sum()


def embed_dense(
    eff: EffectiveHamiltonian, penalties: PenaltyVector, padded_dims=None
) -> np.ndarray:
    """Dense matrix of the padded model, allowing arbitrary padded dimensions."""
    op = EmbeddedOperator(eff, penalties, padded_dims)
    dims = op.dims
    total = np.zeros((op.total_dimension,) * 2, dtype=complex)

    def lift(mat, index):
        out = np.array([[1.0 + 0.0j]])
        for pos, d in enumerate(dims):
            out = np.kron(out, mat if pos == index else np.eye(d))
        return out

    for i, b in enumerate(op.blocks):
        total += lift(b, i)
    for c in op.couplings:
        total += c.nu * (lift(c.v, c.i) @ lift(c.w, c.j))
    return total


def block_spectrum_decomposition(
    eff: EffectiveHamiltonian, penalties: PenaltyVector, padded_dims=None
) -> np.ndarray:
    """Exact spectrum of the padded model as a union over auxiliary sectors.

    For each subset D of subsystems, the sector keeps the original K_i levels
    outside D and the auxiliary levels inside D; its Hamiltonian drops every
    term touching D and gains the constant sum of penalties over D.  The
    sorted concatenation of all sector spectra equals the spectrum of
    :func:`embed_dense` / :func:`embed_to_qubits` as a multiset.
    """
    if len(penalties.lambdas) != eff.n_subsystems:
        raise DimensionError("one penalty per subsystem required")
    dims = _padded_dims(eff, padded_dims)
    aux = [d - k for d, k in zip(dims, eff.dims)]
    values: list[np.ndarray] = []
    n = eff.n_subsystems
    for size in range(n + 1):
        for domain in itertools.combinations(range(n), size):
            inside = set(domain)
            sector_dims = tuple(
                aux[i] if i in inside else eff.dims[i] for i in range(n)
            )
            sector_total = int(np.prod(sector_dims))
            if sector_total == 0:
                continue

            def lift(mat, index):
                out = np.array([[1.0 + 0.0j]])
                for pos, d in enumerate(sector_dims):
                    out = np.kron(out, mat if pos == index else np.eye(d))
                return out

            shift = sum(penalties.lambdas[i] for i in inside)
            ham = shift * np.eye(sector_total, dtype=complex)
            for i, block in enumerate(eff.blocks):
                if i not in inside:
                    ham += lift(block, i)
            for c in eff.couplings:
                if c.i not in inside and c.j not in inside:
                    ham += c.nu * (lift(c.v, c.i) @ lift(c.w, c.j))
            values.append(np.linalg.eigvalsh(ham))
    out = np.sort(np.concatenate(values))
    if out.size != int(np.prod(dims)):
        raise ValidationError("sector dimensions do not add up; internal error")
    return out


def resource_metrics(eff: EffectiveHamiltonian, n_qubit_per_subsystem: int):
    """Truncation rate and qubit requirement of a run.

    TR is the dimension ratio of the restricted to the full Hilbert space;
    the qubit requirement is the larger of the subsystem register and the
    total embedded register sum_i ceil(log2 K_i).
    """
    tr = float(np.prod([k / (1 << n_qubit_per_subsystem) for k in eff.dims]))
    n_req = max(n_qubit_per_subsystem, embedding_qubits(eff))
    return tr, n_req


def embedding_qubits(eff: EffectiveHamiltonian) -> int:
    """Width of the embedded register: sum of ceil(log2 K_i) over subsystems."""
    return sum((k - 1).bit_length() for k in eff.dims)
