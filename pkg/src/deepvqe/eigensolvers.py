"""Variational optimizers, exact-diagonalization oracles and the subsystem
subspace check.

Restarts of the quasi-Newton optimizer are independent and may run
concurrently; each owns its state vectors.  Cost evaluation for a fixed
parameter vector only reads frozen states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .errors import ConvergenceError, DimensionError, NumericError, ValidationError
from .pauli import DENSE_QUBIT_LIMIT, PauliSum, to_dense
from .statevector import (
    AnsatzSpec,
    StateVector,
    expectation,
    finite_difference_gradient,
    parameter_shift_gradient,
    run_ansatz,
    weighted_energy_and_gradient,
)

GRADIENT_MODES = ("adjoint", "parameter-shift", "finite-difference")


@dataclass(frozen=True)
class OptimizerConfig:
    """Quasi-Newton (BFGS) optimizer settings.

    ``tolerance`` is the gradient-norm stopping threshold; ``gradient_mode``
    selects between the reverse-mode analytic gradient (default), the
    parameter-shift rule, and central finite differences with step
    ``fd_step``.  All three agree to high precision for this gate set; the
    slower modes are kept as cross-checks.
    """

    max_iterations: int = 1000
    gradient_mode: str = "adjoint"
    fd_step: float = 1e-5
    tolerance: float = 1e-8
    restarts: int = 5
    seed: int = 0
    polish_iterations: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError("restart count must be >= 1")
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")
        if self.gradient_mode not in GRADIENT_MODES:
            raise ValidationError(f"gradient_mode must be one of {GRADIENT_MODES}")
        if self.polish_iterations < 0:
            raise ValidationError("polish_iterations must be nonnegative")


@dataclass(frozen=True)
class SsvqeConfig:
    """Weighted multi-reference search settings.

    Weights must be strictly decreasing and positive; the k-th optimized
    state targets the k-th lowest eigenstate.  References default to the
    first ``len(weights)`` computational basis states.
    """

    weights: tuple[float, ...] = (2.0, 1.0)
    references: tuple[str, ...] | None = None

    def __post_init__(self):
        w = self.weights
        if not w or any(x <= 0 for x in w) or any(w[i] <= w[i + 1] for i in range(len(w) - 1)):
            raise ValidationError("weights must be strictly decreasing positive reals")
        if self.references is not None:
            if len(self.references) != len(w):
                raise ValidationError("number of references must equal number of weights")
            if len(set(self.references)) != len(self.references):
                raise ValidationError("reference bitstrings must be pairwise distinct")

    def resolved_references(self, n_qubits: int) -> tuple[str, ...]:
        if self.references is not None:
            for r in self.references:
                if len(r) != n_qubits:
                    raise DimensionError("reference bitstring length mismatch")
            return self.references
        if len(self.weights) > (1 << n_qubits):
            raise ValidationError("more states requested than basis states available")
        return tuple(format(i, f"0{n_qubits}b") for i in range(len(self.weights)))


@dataclass
class SpectrumResult:
    """Sorted low eigenvalues plus the method that produced them."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    method: str = "dense"

    def __post_init__(self):
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(self.eigenvalues) < -1e-12):
            raise ValidationError("eigenvalues must be sorted ascending")


@dataclass
class VqeResult:
    energy: float
    params: np.ndarray
    state: StateVector


@dataclass
class SsvqeResult:
    """Optimized energies in reference order (largest weight first)."""

    energies: list[float]
    params: np.ndarray
    references: tuple[str, ...]
    states: list[StateVector] = field(default_factory=list)


# -- generic minimization ----------------------------------------------------


def minimize(cost, init, cfg: OptimizerConfig, grad=None, fun_and_grad=None, sampler=None):
    """Quasi-Newton minimization with restarts.

    The first attempt starts from ``init``; further restarts draw starting
    points from ``sampler(rng)`` (default: uniform on [0, 2pi) per
    component).  ``fun_and_grad``, when given, evaluates cost and gradient
    in one call and takes precedence over ``grad``.  Returns
    ``(best_value, best_params)`` over all restarts.  Non-finite cost values
    raise :class:`NumericError` with the offending parameters attached.
    """
    init = np.atleast_1d(np.asarray(init, dtype=float))
    rng = np.random.default_rng(cfg.seed)
    if sampler is None:
        sampler = lambda r: r.uniform(0.0, 2.0 * math.pi, size=init.size)

    def checked_cost(x):
        value = cost(x)
        if not np.isfinite(value):
            raise NumericError(f"cost returned non-finite value {value}", params=np.array(x))
        return float(value)

    if fun_and_grad is not None:

        def objective(x):
            value, g = fun_and_grad(x)
            if not np.isfinite(value):
                raise NumericError(
                    f"cost returned non-finite value {value}", params=np.array(x)
                )
            return float(value), g

        jac = True
    else:
        objective = checked_cost
        if grad is None:
            fd = cfg.fd_step

            def grad(x):
                g = np.zeros_like(x)
                for i in range(x.size):
                    step = np.zeros_like(x)
                    step[i] = fd
                    g[i] = (checked_cost(x + step) - checked_cost(x - step)) / (2 * fd)
                return g

        jac = grad

    best_value = objective(init)[0] if jac is True else checked_cost(init)
    best_params = init.copy()
    for attempt in range(cfg.restarts):
        x0 = init if attempt == 0 else sampler(rng)
        result = _scipy_minimize(
            objective,
            x0,
            jac=jac,
            method="BFGS",
            options={"maxiter": cfg.max_iterations, "gtol": cfg.tolerance},
        )
        if result.fun < best_value:
            best_value, best_params = float(result.fun), np.asarray(result.x)
    if cfg.polish_iterations:
        result = _scipy_minimize(
            objective,
            best_params,
            jac=jac,
            method="BFGS",
            options={"maxiter": cfg.polish_iterations, "gtol": cfg.tolerance},
        )
        if result.fun < best_value:
            best_value, best_params = float(result.fun), np.asarray(result.x)
    return best_value, best_params


def _ansatz_objective(spec, references, weights, observable, cfg):
    """Weighted multi-reference cost for the optimizer.

    Returns ``(cost, grad, fun_and_grad)``; the fused callable is set for the
    reverse-mode gradient (the default), the split pair for the slower
    cross-check modes.
    """

    def cost(params):
        total = 0.0
        for w, ref in zip(weights, references):
            total += w * expectation(run_ansatz(spec, params, ref), observable)
        return total

    if cfg.gradient_mode == "adjoint":

        def fun_and_grad(params):
            value, grad, _ = weighted_energy_and_gradient(
                spec, params, references, weights, observable
            )
            return value, grad

        return cost, None, fun_and_grad

    if cfg.gradient_mode == "parameter-shift":

        def grad(params):
            g = np.zeros(spec.n_params)
            for w, ref in zip(weights, references):
                g += w * parameter_shift_gradient(spec, params, ref, observable)
            return g

    else:

        def grad(params):
            g = np.zeros(spec.n_params)
            for w, ref in zip(weights, references):
                g += w * finite_difference_gradient(
                    spec, params, ref, observable, step=cfg.fd_step
                )
            return g

    return cost, grad, None


def vqe_ground(h, spec: AnsatzSpec, cfg: OptimizerConfig) -> VqeResult:
    """Variational ground-state search of a hermitian observable.

    The returned energy is an upper bound on the exact ground energy; the
    best of ``cfg.restarts`` independent seeded starts is kept.
    """
    if isinstance(h, PauliSum) and not h.is_hermitian:
        raise ValidationError("Hamiltonian must be hermitian")
    if h.n_qubits != spec.n_qubits:
        raise DimensionError("Hamiltonian and ansatz qubit counts differ")
    reference = "0" * spec.n_qubits
    cost, grad, fun_and_grad = _ansatz_objective(spec, [reference], [1.0], h, cfg)
    rng = np.random.default_rng(cfg.seed)
    init = rng.uniform(0.0, 2.0 * math.pi, size=spec.n_params)
    energy, params = minimize(cost, init, cfg, grad=grad, fun_and_grad=fun_and_grad)
    return VqeResult(energy, params, run_ansatz(spec, params, reference))


def ssvqe(h, spec: AnsatzSpec, cfg: OptimizerConfig, scfg: SsvqeConfig) -> SsvqeResult:
    """Weighted subspace search for the lowest eigenstates of ``h``.

    One circuit maps the orthogonal reference states to approximate
    eigenstates; energies are reported in reference order (largest weight,
    hence ground state, first).
    """
    if isinstance(h, PauliSum) and not h.is_hermitian:
        raise ValidationError("Hamiltonian must be hermitian")
    if h.n_qubits != spec.n_qubits:
        raise DimensionError("Hamiltonian and ansatz qubit counts differ")
    references = scfg.resolved_references(spec.n_qubits)
    cost, grad, fun_and_grad = _ansatz_objective(spec, references, scfg.weights, h, cfg)
    rng = np.random.default_rng(cfg.seed)
    init = rng.uniform(0.0, 2.0 * math.pi, size=spec.n_params)
    _, params = minimize(cost, init, cfg, grad=grad, fun_and_grad=fun_and_grad)
    states = [run_ansatz(spec, params, ref) for ref in references]
    energies = [float(expectation(s, h)) for s in states]
    return SsvqeResult(energies, params, references, states)


# -- exact diagonalization ---------------------------------------------------


def _dense_spectrum(h: PauliSum, k: int, with_vectors: bool):
    m = to_dense(h)
    if np.max(np.abs(m.imag)) < 1e-12:
        m = m.real
    if with_vectors:
        vals, vecs = np.linalg.eigh(m)
        return vals[:k], vecs[:, :k].astype(complex)
    return np.linalg.eigvalsh(m)[:k], None


def lanczos_smallest(
    matvec,
    dim: int,
    k: int,
    max_krylov: int = 200,
    residual_tolerance: float = 1e-8,
    seed: int = 0,
    with_vectors: bool = False,
):
    """Smallest eigenvalues of a hermitian operator given only its action.

    Lanczos with full reorthogonalization; the Krylov space grows until the
    residual bound |beta * s_last| of every requested Ritz pair drops below
    ``residual_tolerance`` or ``min(max_krylov, dim)`` steps are reached.
    Repeated eigenvalues are found once per Krylov space; ask for vectors and
    deflate if multiplicities matter.
    """
    m = min(max_krylov, dim)
    if k > m:
        raise ValidationError(f"cannot resolve {k} eigenvalues with Krylov dimension {m}")
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    basis = [q]
    alphas: list[float] = []
    betas: list[float] = []
    converged = False
    ritz = None
    residual = math.inf
    for j in range(m):
        w = matvec(basis[-1])
        alphas.append(float(np.vdot(basis[-1], w).real))
        w = w - alphas[-1] * basis[-1]
        if betas:
            w = w - betas[-1] * basis[-2]
        for qv in basis:  # full reorthogonalization
            w -= np.vdot(qv, w) * qv
        b = float(np.linalg.norm(w))
        if len(alphas) >= k:
            t = np.diag(alphas)
            if betas:
                t = t + np.diag(betas, 1) + np.diag(betas, -1)
            vals, vecs = np.linalg.eigh(t)
            ritz = (vals, vecs)
            residual = float(np.max(np.abs(b * vecs[-1, :k])))
            if residual < residual_tolerance or b < 1e-14 or len(alphas) == dim:
                converged = True
                break
        if j < m - 1:
            if b < 1e-14:
                raise ConvergenceError(
                    "Krylov space exhausted before resolving the requested eigenvalues",
                    residual=b,
                )
            betas.append(b)
            basis.append(w / b)
    if not converged:
        raise ConvergenceError(
            f"Lanczos did not converge within {m} steps (residual {residual:.3e})",
            residual=residual,
        )
    vals, vecs = ritz
    if with_vectors:
        qmat = np.column_stack(basis[: len(alphas)])
        return vals[:k], qmat @ vecs[:, :k]
    return vals[:k], None


def exact_spectrum(
    h: PauliSum,
    k: int = 2,
    dense_limit: int = DENSE_QUBIT_LIMIT,
    with_vectors: bool = False,
    lanczos_seed: int = 0,
) -> SpectrumResult:
    """k smallest eigenvalues of a hermitian Pauli sum.

    Dense eigendecomposition up to ``dense_limit`` qubits, matrix-free
    Lanczos on the term-wise action above.
    """
    if k < 1:
        raise ValidationError("k must be >= 1")
    if not h.is_hermitian:
        raise ValidationError("exact_spectrum requires a hermitian operator")
    dim = 1 << h.n_qubits
    k = min(k, dim)
    if h.n_qubits <= dense_limit:
        vals, vecs = _dense_spectrum(h, k, with_vectors)
        return SpectrumResult(vals, vecs, method="dense")
    vals, vecs = lanczos_smallest(
        h.apply, dim, k, seed=lanczos_seed, with_vectors=with_vectors
    )
    return SpectrumResult(vals, vecs, method="lanczos")


def qse_spectrum(h_sub: PauliSum, ops, ref: StateVector, k: int | None = None) -> SpectrumResult:
    """Eigenvalues of the subsystem Hamiltonian projected onto the span of
    the excitation operators applied to a reference state.

    ``ops`` is an ExcitationSet or a plain sequence of PauliSums.  Raises
    :class:`DegenerateBasisError` when the raw basis has rank zero.
    """
    from .coarse_grain import gram_matrix, matrix_elements, orthonormalize

    if abs(ref.norm - 1.0) > 1e-8:
        raise ValidationError("reference state must be normalized")
    operators = list(getattr(ops, "operators", ops))
    gram = gram_matrix([ref], operators)
    s, _ = orthonormalize(gram)
    projected = matrix_elements([ref], operators, s, h_sub)
    vals = np.linalg.eigvalsh(projected)
    if k is not None:
        vals = vals[:k]
    return SpectrumResult(vals, method="dense")
