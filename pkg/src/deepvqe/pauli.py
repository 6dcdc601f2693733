"""Pauli-string and Pauli-sum algebra.

Conventions used throughout the package:

* Qubits are labeled 1..n.  A Pauli string stores one letter from {I, X, Y, Z}
  per qubit in a bit-pair encoding: bit (i-1) of ``x_mask``/``z_mask`` holds
  the X/Z component of qubit i, with X=(1,0), Y=(1,1), Z=(0,1).
* Dense matrices and state vectors order basis states so that qubit 1 is the
  most significant bit of the index, i.e. the matrix of a string is the
  Kronecker product of its letters taken in qubit order 1..n.
* All values are immutable after construction and safe to share between
  threads; every operation here is a pure function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import DimensionError, ResourceLimitError

#: Coefficients with magnitude below this are dropped from a PauliSum.
DROP_TOLERANCE = 1e-12

#: Largest qubit count for which dense 2^n x 2^n matrices are built directly.
DENSE_QUBIT_LIMIT = 13

_LETTERS = "IXYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_I_POWERS = (1.0 + 0.0j, 1.0j, -1.0 + 0.0j, -1.0j)


def _reverse_bits(mask: int, n: int) -> int:
    """Map qubit-order bits (qubit i at bit i-1) to index-space bits (qubit 1 = MSB)."""
    out = 0
    for i in range(n):
        if mask >> i & 1:
            out |= 1 << (n - 1 - i)
    return out


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Pauli letters with unit coefficient."""

    n_qubits: int
    x_mask: int
    z_mask: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError("n_qubits must be positive")
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full:
            raise DimensionError("mask bits outside qubit range")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Build from a letter string ordered qubit 1 -> n, e.g. ``"XIZ"``."""
        x = z = 0
        for i, letter in enumerate(label):
            try:
                xb, zb = _LETTER_BITS[letter]
            except KeyError:
                raise ValueError(f"invalid Pauli letter {letter!r}") from None
            x |= xb << i
            z |= zb << i
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliString":
        """A single non-identity letter on one qubit (1-based)."""
        if not 1 <= qubit <= n_qubits:
            raise DimensionError(f"qubit {qubit} outside 1..{n_qubits}")
        xb, zb = _LETTER_BITS[letter]
        return cls(n_qubits, xb << (qubit - 1), zb << (qubit - 1))

    @property
    def label(self) -> str:
        return "".join(self.letter(q) for q in range(1, self.n_qubits + 1))

    def letter(self, qubit: int) -> str:
        i = qubit - 1
        return _BITS_LETTER[(self.x_mask >> i & 1, self.z_mask >> i & 1)]

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x_mask | self.z_mask
        return tuple(i + 1 for i in range(self.n_qubits) if m >> i & 1)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def restrict(self, qubits: tuple[int, ...]) -> "PauliString":
        """Letters at the given (1-based) qubits, as a string on len(qubits) qubits."""
        x = z = 0
        for local, q in enumerate(qubits):
            x |= (self.x_mask >> (q - 1) & 1) << local
            z |= (self.z_mask >> (q - 1) & 1) << local
        return PauliString(len(qubits), x, z)

    def embed(self, n_total: int, positions: tuple[int, ...]) -> "PauliString":
        """Place letter of local qubit k at global qubit positions[k-1]."""
        if len(positions) != self.n_qubits:
            raise DimensionError("positions length must equal n_qubits")
        x = z = 0
        for local, q in enumerate(positions):
            x |= (self.x_mask >> local & 1) << (q - 1)
            z |= (self.z_mask >> local & 1) << (q - 1)
        return PauliString(n_total, x, z)

    def __repr__(self):
        return f"PauliString({self.label!r})"


def pauli_mul(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Product of two Pauli strings.

    Returns ``(phase, product)`` with ``phase * product`` equal to the matrix
    product ``a @ b``; the phase is one of {1, i, -1, -i}.
    """
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    # Per qubit: W(x,z) = i^{xz} X^x Z^z, so the accumulated power of i is
    # x1.z1 + x2.z2 + 2*z1.x2 - x3.z3 (mod 4).
    exp = (
        (a.x_mask & a.z_mask).bit_count()
        + (b.x_mask & b.z_mask).bit_count()
        + 2 * (a.z_mask & b.x_mask).bit_count()
        - (x & z).bit_count()
    ) % 4
    return _I_POWERS[exp], PauliString(a.n_qubits, x, z)


def _string_phase(x_mask: int, z_mask: int) -> complex:
    """Global phase i^{|x&z|} relating the string to X^x Z^z."""
    return _I_POWERS[(x_mask & z_mask).bit_count() % 4]


def apply_string(
    x_mask: int, z_mask: int, n_qubits: int, vec: np.ndarray, coeff: complex = 1.0
) -> np.ndarray:
    """Apply ``coeff * P`` to a dense state vector (qubit 1 = MSB index bit)."""
    dim = 1 << n_qubits
    xm = _reverse_bits(x_mask, n_qubits)
    zm = _reverse_bits(z_mask, n_qubits)
    amp = coeff * _string_phase(x_mask, z_mask)
    idx = np.arange(dim)
    src = idx ^ xm
    if zm:
        sign = 1 - 2 * (np.bitwise_count(src & zm).astype(np.int64) & 1)
        return (amp * sign) * vec[src]
    return amp * vec[src]


class PauliSum:
    """Weighted sum of Pauli strings with complex coefficients.

    Terms whose coefficient magnitude falls below ``DROP_TOLERANCE`` are not
    stored, so repeated algebra does not accumulate floating-point dust.
    Instances are immutable; arithmetic returns new sums.
    """

    __slots__ = ("n_qubits", "_terms", "_hermitian")

    def __init__(self, n_qubits: int, terms: dict[tuple[int, int], complex] | None = None):
        if n_qubits < 1:
            raise DimensionError("n_qubits must be positive")
        self.n_qubits = n_qubits
        clean = {}
        if terms:
            for key, coeff in terms.items():
                if abs(coeff) > DROP_TOLERANCE:
                    clean[key] = complex(coeff)
        self._terms = clean
        self._hermitian: bool | None = None

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits, {})

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): coeff})

    @classmethod
    def from_terms(cls, n_qubits: int, terms: Iterable[tuple[complex, PauliString]]) -> "PauliSum":
        acc: dict[tuple[int, int], complex] = {}
        for coeff, string in terms:
            if string.n_qubits != n_qubits:
                raise DimensionError("term qubit count mismatch")
            key = (string.x_mask, string.z_mask)
            acc[key] = acc.get(key, 0.0) + coeff
        return cls(n_qubits, acc)

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0) -> "PauliSum":
        s = PauliString.from_label(label)
        return cls(s.n_qubits, {(s.x_mask, s.z_mask): coeff})

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str, coeff: complex = 1.0) -> "PauliSum":
        s = PauliString.single(n_qubits, qubit, letter)
        return cls(n_qubits, {(s.x_mask, s.z_mask): coeff})

    # -- inspection ---------------------------------------------------

    @property
    def n_terms(self) -> int:
        return len(self._terms)

    def terms(self) -> Iterator[tuple[PauliString, complex]]:
        """Iterate (string, coefficient) in a canonical deterministic order."""
        for x, z in sorted(self._terms):
            yield PauliString(self.n_qubits, x, z), self._terms[(x, z)]

    def coefficient(self, string: PauliString) -> complex:
        return self._terms.get((string.x_mask, string.z_mask), 0.0 + 0.0j)

    @property
    def support(self) -> tuple[int, ...]:
        m = 0
        for x, z in self._terms:
            m |= x | z
        return tuple(i + 1 for i in range(self.n_qubits) if m >> i & 1)

    @property
    def is_hermitian(self) -> bool:
        """A sum is hermitian iff every coefficient is real (strings are hermitian)."""
        if self._hermitian is None:
            self._hermitian = all(abs(c.imag) <= DROP_TOLERANCE for c in self._terms.values())
        return self._hermitian

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __repr__(self):
        parts = [f"({c:.6g})*{s.label}" for s, c in list(self.terms())[:4]]
        more = "" if self.n_terms <= 4 else f" +{self.n_terms - 4} terms"
        return f"PauliSum[{' + '.join(parts) or '0'}{more}]"

    # -- algebra ------------------------------------------------------

    def _check_same_size(self, other: "PauliSum"):
        if self.n_qubits != other.n_qubits:
            raise DimensionError(f"qubit counts differ: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check_same_size(other)
        acc = dict(self._terms)
        for key, coeff in other._terms.items():
            acc[key] = acc.get(key, 0.0) + coeff
        return PauliSum(self.n_qubits, acc)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __neg__(self) -> "PauliSum":
        return (-1.0) * self

    def __rmul__(self, scalar: complex) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: scalar * c for k, c in self._terms.items()})

    def __mul__(self, other):
        """Operator product with another sum, or scaling by a scalar."""
        if isinstance(other, (int, float, complex)):
            return other * self
        self._check_same_size(other)
        acc: dict[tuple[int, int], complex] = {}
        for (xa, za), ca in self._terms.items():
            pa = PauliString(self.n_qubits, xa, za)
            for (xb, zb), cb in other._terms.items():
                phase, prod = pauli_mul(pa, PauliString(self.n_qubits, xb, zb))
                key = (prod.x_mask, prod.z_mask)
                acc[key] = acc.get(key, 0.0) + ca * cb * phase
        return PauliSum(self.n_qubits, acc)

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c.conjugate() for k, c in self._terms.items()})

    def embed(self, n_total: int, offset: int = 0) -> "PauliSum":
        """Lift to a larger register, local qubit k -> global qubit offset+k."""
        if offset < 0 or offset + self.n_qubits > n_total:
            raise DimensionError("embedded sum does not fit in target register")
        return PauliSum(
            n_total, {(x << offset, z << offset): c for (x, z), c in self._terms.items()}
        )

    def restrict(self, qubits: tuple[int, ...]) -> "PauliSum":
        """Keep only letters at the given qubits; caller guarantees support fits."""
        acc: dict[tuple[int, int], complex] = {}
        for (x, z), c in self._terms.items():
            s = PauliString(self.n_qubits, x, z).restrict(qubits)
            key = (s.x_mask, s.z_mask)
            acc[key] = acc.get(key, 0.0) + c
        return PauliSum(len(qubits), acc)

    # -- dense interop ------------------------------------------------

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-free action on a state vector, evaluated term by term."""
        dim = 1 << self.n_qubits
        if vec.shape != (dim,):
            raise DimensionError(f"vector length {vec.shape} does not match {dim}")
        out = np.zeros(dim, dtype=complex)
        idx = np.arange(dim)
        for (x, z), coeff in self._terms.items():
            xm = _reverse_bits(x, self.n_qubits)
            zm = _reverse_bits(z, self.n_qubits)
            amp = coeff * _string_phase(x, z)
            src = idx ^ xm if xm else idx
            if zm:
                sign = 1 - 2 * (np.bitwise_count(src & zm).astype(np.int64) & 1)
                out += (amp * sign) * vec[src]
            else:
                out += amp * vec[src]
        return out

    # -- serialization ------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "terms": [
                {"string": s.label, "re": c.real, "im": c.imag} for s, c in self.terms()
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PauliSum":
        n = int(data["n_qubits"])
        return cls.from_terms(
            n,
            (
                (complex(t["re"], t.get("im", 0.0)), PauliString.from_label(t["string"]))
                for t in data["terms"]
            ),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "PauliSum":
        return cls.from_json_dict(json.loads(text))


def to_dense(s: PauliSum, limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """Dense 2^n x 2^n matrix of a Pauli sum.

    Refuses registers above ``limit`` qubits; larger systems must use the
    matrix-free ``PauliSum.apply`` path.
    """
    if s.n_qubits > limit:
        raise ResourceLimitError(
            f"{s.n_qubits} qubits exceeds dense limit of {limit}; use matrix-free paths"
        )
    dim = 1 << s.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    for string, coeff in s.terms():
        xm = _reverse_bits(string.x_mask, s.n_qubits)
        zm = _reverse_bits(string.z_mask, s.n_qubits)
        amp = coeff * _string_phase(string.x_mask, string.z_mask)
        if zm:
            sign = 1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)
            out[idx ^ xm, idx] += amp * sign
        else:
            out[idx ^ xm, idx] += amp
    return out


def dense_to_pauli_sum(m: np.ndarray, drop_tolerance: float = DROP_TOLERANCE) -> PauliSum:
    """Expand a square matrix of dimension 2^n in the Pauli-string basis.

    The coefficient of string P is Tr(P m) / 2^n; callers zero-pad K x K
    blocks up to the next power of two before conversion.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("matrix must be square")
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n or dim < 2:
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    idx = np.arange(dim)
    terms: dict[tuple[int, int], complex] = {}
    for x in range(dim):
        xm = _reverse_bits(x, n)
        cols = m[idx ^ xm, idx]
        for z in range(dim):
            zm = _reverse_bits(z, n)
            if zm:
                sign = 1 - 2 * (np.bitwise_count(idx & zm).astype(np.int64) & 1)
                tr = np.dot(sign, cols)
            else:
                tr = cols.sum()
            coeff = tr * _string_phase(x, z).conjugate() / dim
            if abs(coeff) > drop_tolerance:
                terms[(x, z)] = coeff
    return PauliSum(n, terms)


def op_norm(s: PauliSum, limit: int = DENSE_QUBIT_LIMIT) -> float:
    """Spectral (operator) norm of a Pauli sum.

    Dense eigendecomposition up to ``limit`` qubits; above that an iterative
    largest-magnitude eigenvalue (hermitian) or singular value computation on
    the matrix-free action.
    """
    if s.n_terms == 0:
        return 0.0
    if s.n_qubits <= limit:
        m = to_dense(s, limit)
        if s.is_hermitian:
            return float(np.max(np.abs(np.linalg.eigvalsh(m))))
        return float(np.linalg.norm(m, 2))
    from scipy.sparse.linalg import LinearOperator, eigsh, svds

    dim = 1 << s.n_qubits
    if s.is_hermitian:
        op = LinearOperator((dim, dim), matvec=s.apply, dtype=complex)
        vals = eigsh(op, k=1, which="LM", return_eigenvectors=False)
        return float(abs(vals[0]))
    adj = s.dagger()
    op = LinearOperator(
        (dim, dim), matvec=s.apply, rmatvec=adj.apply, dtype=complex
    )
    return float(svds(op, k=1, return_singular_vectors=False)[0])


def kron_sum(factors: Iterable[PauliSum]) -> PauliSum:
    """Tensor product of sums on disjoint registers, concatenated in order."""
    factors = list(factors)
    n_total = sum(f.n_qubits for f in factors)
    out = PauliSum.identity(n_total)
    offset = 0
    for f in factors:
        out = out * f.embed(n_total, offset)
        offset += f.n_qubits
    return out
