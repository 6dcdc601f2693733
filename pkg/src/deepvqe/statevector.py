"""Exact statevector simulation of the hardware-efficient ansatz.

The circuit family is fixed: alternating layers of single-qubit RY and RZ
rotations and a CZ ladder over neighboring qubits, closing with one more
rotation layer.  A depth-D circuit on n qubits therefore has 2*n*(D+1)
parameters, laid out as ``params[2*(layer*n + q-1)]`` for the RY angle and
``params[2*(layer*n + q-1) + 1]`` for the RZ angle of qubit q in rotation
layer ``layer`` (0-based).

Amplitude layout: qubit 1 is the most significant bit of the vector index,
matching the Kronecker-product convention of :mod:`deepvqe.pauli`.

Thread-safety: a StateVector is mutated in place by a single owner while a
circuit is being applied (``run_ansatz`` builds a fresh vector and is the only
mutating entry point).  ``expectation``, ``transition`` and ``overlap`` treat
their inputs as frozen and never write to them, so a finished state may be
read concurrently.  Global phase is unspecified everywhere; compare states via
overlaps or expectation values only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass
class StateVector:
    """Complex amplitude vector over n qubits (qubit 1 = MSB of the index)."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        dim = 1 << self.n_qubits
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (dim,):
            raise DimensionError(
                f"amplitude vector of length {self.amplitudes.shape} does not match {dim}"
            )

    @classmethod
    def from_bitstring(cls, bits: str) -> "StateVector":
        """Computational basis state; first character is qubit 1."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid bitstring {bits!r}")
        amps = np.zeros(1 << len(bits), dtype=complex)
        amps[int(bits, 2)] = 1.0
        return cls(len(bits), amps)

    @classmethod
    def zero_state(cls, n_qubits: int) -> "StateVector":
        return cls.from_bitstring("0" * n_qubits)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


@dataclass(frozen=True)
class AnsatzSpec:
    """Shape of the hardware-efficient circuit: qubit count and depth."""

    n_qubits: int
    depth: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DimensionError("n_qubits must be positive")
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")

    @property
    def n_params(self) -> int:
        return 2 * self.n_qubits * (self.depth + 1)


# -- gate kernels (in place on a raw amplitude array) ----------------------


def _views(amps: np.ndarray, n: int, q: int):
    """Split into the q-th qubit's 0/1 slices; a leading batch axis is allowed."""
    v = amps.reshape(-1, 1 << (q - 1), 2, 1 << (n - q))
    return v[:, :, 0, :], v[:, :, 1, :]


def _apply_ry(amps: np.ndarray, n: int, q: int, theta: float):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    a, b = _views(amps, n, q)
    na = c * a - s * b
    b *= c
    b += s * a
    a[:] = na


def _apply_rz(amps: np.ndarray, n: int, q: int, theta: float):
    a, b = _views(amps, n, q)
    a *= complex(math.cos(theta / 2), -math.sin(theta / 2))
    b *= complex(math.cos(theta / 2), math.sin(theta / 2))


def _apply_rotation_pair(amps: np.ndarray, n: int, q: int, theta_y: float, theta_z: float):
    """One fused RZ(theta_z) RY(theta_y) on qubit q."""
    c, s = math.cos(theta_y / 2), math.sin(theta_y / 2)
    zm = complex(math.cos(theta_z / 2), -math.sin(theta_z / 2))
    zp = zm.conjugate()
    a, b = _views(amps, n, q)
    na = (zm * c) * a - (zm * s) * b
    b *= zp * c
    b += (zp * s) * a
    a[:] = na


_LADDER_SIGNS: dict[int, np.ndarray] = {}


def _ladder_sign(n: int) -> np.ndarray:
    """Diagonal of the full CZ ladder over neighboring qubits, cached per size."""
    sign = _LADDER_SIGNS.get(n)
    if sign is None:
        idx = np.arange(1 << n)
        count = np.zeros(1 << n, dtype=np.int64)
        for q in range(1, n):
            count += (idx >> (n - q)) & (idx >> (n - q - 1)) & 1
        sign = (1.0 - 2.0 * (count & 1)).astype(float)
        _LADDER_SIGNS[n] = sign
    return sign


def _apply_ladder(amps: np.ndarray, n: int):
    view = amps.reshape(-1, 1 << n)
    view *= _ladder_sign(n)


def _vdot_y(bra: np.ndarray, ket: np.ndarray, n: int, q: int) -> complex:
    """<bra| Y_q |ket> without materializing Y_q |ket>."""
    ba, bb = _views(bra, n, q)
    ka, kb = _views(ket, n, q)
    return -1j * np.vdot(ba, kb) + 1j * np.vdot(bb, ka)


def _vdot_z(bra: np.ndarray, ket: np.ndarray, n: int, q: int) -> complex:
    ba, bb = _views(bra, n, q)
    ka, kb = _views(ket, n, q)
    return np.vdot(ba, ka) - np.vdot(bb, kb)


def _gate_sequence(spec: AnsatzSpec):
    """Ordered gate list: ("y"|"z", qubit, param_index) or ("ladder", 0, 0),
    the latter standing for the whole CZ ladder (a single diagonal)."""
    n, gates = spec.n_qubits, []
    for layer in range(spec.depth + 1):
        for q in range(1, n + 1):
            base = 2 * (layer * n + q - 1)
            gates.append(("y", q, base))
            gates.append(("z", q, base + 1))
        if layer < spec.depth and n > 1:
            gates.append(("ladder", 0, 0))
    return gates


def run_ansatz(spec: AnsatzSpec, params: np.ndarray, reference: str | None = None) -> StateVector:
    """Apply the hardware-efficient circuit to a computational basis state.

    ``reference`` defaults to the all-zeros bitstring.  Norm is preserved by
    construction; the output is a freshly allocated state.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (spec.n_params,):
        raise DimensionError(
            f"expected {spec.n_params} parameters for depth {spec.depth} on "
            f"{spec.n_qubits} qubits, got {params.shape}"
        )
    if reference is None:
        reference = "0" * spec.n_qubits
    if len(reference) != spec.n_qubits:
        raise DimensionError("reference bitstring length mismatch")
    state = StateVector.from_bitstring(reference)
    amps, n = state.amplitudes, spec.n_qubits
    for layer in range(spec.depth + 1):
        for q in range(1, n + 1):
            base = 2 * (layer * n + q - 1)
            _apply_rotation_pair(amps, n, q, params[base], params[base + 1])
        if layer < spec.depth and n > 1:
            _apply_ladder(amps, n)
    return state


def expectation(state: StateVector, observable) -> float | complex:
    """<state|A|state>, evaluated term by term without densifying A.

    ``observable`` is a PauliSum or any object exposing ``n_qubits``,
    ``apply(vector)`` and ``is_hermitian``.  Returns a real float for
    hermitian observables, complex otherwise.  The state is not modified.
    """
    if observable.n_qubits != state.n_qubits:
        raise DimensionError(
            f"observable on {observable.n_qubits} qubits, state on {state.n_qubits}"
        )
    value = complex(np.vdot(state.amplitudes, observable.apply(state.amplitudes)))
    return value.real if observable.is_hermitian else value


def transition(bra: StateVector, ket: StateVector, observable) -> complex:
    """<bra|A|ket> for possibly different states; inputs are read-only."""
    if bra.n_qubits != ket.n_qubits or observable.n_qubits != ket.n_qubits:
        raise DimensionError("qubit counts of bra, ket and observable must match")
    return complex(np.vdot(bra.amplitudes, observable.apply(ket.amplitudes)))


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


# -- analytic gradients ------------------------------------------------------


def weighted_energy_and_gradient(
    spec: AnsatzSpec,
    params: np.ndarray,
    references: list[str],
    weights,
    observable,
) -> tuple[float, np.ndarray, list[float]]:
    """Weighted multi-reference cost, its exact gradient, and the per-state
    energies, all in one pass.

    Reverse-mode (adjoint) differentiation: all reference states are pushed
    through the circuit as one batch, the observable is applied once per
    state, and a single backward sweep undoes each gate from the batch of
    states and adjoint carriers.  Numerically identical to the
    parameter-shift rule for this RY/RZ/CZ gate set.
    """
    params = np.asarray(params, dtype=float)
    if params.shape != (spec.n_params,):
        raise DimensionError(
            f"expected {spec.n_params} parameters, got {params.shape}"
        )
    n, dim, r = spec.n_qubits, 1 << spec.n_qubits, len(references)
    psi = np.zeros((r, dim), dtype=complex)
    for row, ref in enumerate(references):
        if len(ref) != n:
            raise DimensionError("reference bitstring length mismatch")
        psi[row, int(ref, 2)] = 1.0
    gates = _gate_sequence(spec)
    for kind, q, extra in gates:
        if kind == "y":
            _apply_ry(psi, n, q, params[extra])
        elif kind == "z":
            _apply_rz(psi, n, q, params[extra])
        else:
            _apply_ladder(psi, n)
    phi = np.stack([observable.apply(psi[row]) for row in range(r)])
    energies = [float(np.vdot(psi[row], phi[row]).real) for row in range(r)]
    cost = float(np.dot(weights, energies))
    # rows 0..r-1 carry the states, rows r..2r-1 the adjoint carriers
    both = np.concatenate([psi, phi], axis=0)
    grad = np.zeros_like(params)
    for kind, q, extra in reversed(gates):
        if kind == "ladder":
            _apply_ladder(both, n)  # self-inverse
            continue
        vdot = _vdot_y if kind == "y" else _vdot_z
        total = 0.0
        for row, w in enumerate(weights):
            total += w * vdot(both[r + row], both[row], n, q).imag
        grad[extra] = total
        undo = _apply_ry if kind == "y" else _apply_rz
        undo(both, n, q, -params[extra])
    return cost, grad, energies


def energy_and_gradient(
    spec: AnsatzSpec, params: np.ndarray, reference: str | None, observable
) -> tuple[float, np.ndarray]:
    """Cost <psi(params)|A|psi(params)> and its exact gradient in one pass."""
    if reference is None:
        reference = "0" * spec.n_qubits
    cost, grad, _ = weighted_energy_and_gradient(
        spec, params, [reference], [1.0], observable
    )
    return cost, grad


def parameter_shift_gradient(
    spec: AnsatzSpec, params: np.ndarray, reference: str | None, observable
) -> np.ndarray:
    """Exact gradient via the +-pi/2 shift rule, one circuit pair per parameter."""
    params = np.asarray(params, dtype=float)
    grad = np.zeros_like(params)
    for i in range(params.size):
        shifted = params.copy()
        shifted[i] += math.pi / 2
        plus = expectation(run_ansatz(spec, shifted, reference), observable)
        shifted[i] -= math.pi
        minus = expectation(run_ansatz(spec, shifted, reference), observable)
        grad[i] = 0.5 * (plus - minus)
    return grad


def finite_difference_gradient(
    spec: AnsatzSpec, params: np.ndarray, reference: str | None, observable, step: float = 1e-5
) -> np.ndarray:
    """Central finite-difference gradient, kept as a cross-check mode."""
    params = np.asarray(params, dtype=float)
    grad = np.zeros_like(params)
    for i in range(params.size):
        shifted = params.copy()
        shifted[i] += step
        plus = expectation(run_ansatz(spec, shifted, reference), observable)
        shifted[i] -= 2 * step
        minus = expectation(run_ansatz(spec, shifted, reference), observable)
        grad[i] = (plus - minus) / (2 * step)
    return grad
