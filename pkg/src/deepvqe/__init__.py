"""Classical simulation toolkit for divide-and-conquer VQE: subsystem
solvers, coarse-grained effective Hamiltonians with provably preserved low
spectra, penalty-padded qubit embeddings, and exact-diagonalization
baselines for spin chains and fermionic models."""

from .coarse_grain import (
    ExcitationSet,
    LocalBasis,
    build_local_basis,
    gram_matrix,
    matrix_elements,
    multi_state_basis,
    orthonormalize,
)
from .effective_model import (
    Coupling,
    EffectiveHamiltonian,
    EmbeddedOperator,
    PenaltyVector,
    assemble_effective,
    block_spectrum_decomposition,
    embed_dense,
    embed_to_qubits,
    embedding_qubits,
    extensiveness,
    penalty_bounds,
    resource_metrics,
)
from .eigensolvers import (
    OptimizerConfig,
    SpectrumResult,
    SsvqeConfig,
    SsvqeResult,
    VqeResult,
    exact_spectrum,
    lanczos_smallest,
    minimize,
    qse_spectrum,
    ssvqe,
    vqe_ground,
)
from .errors import (
    ArityError,
    ConvergenceError,
    DeepVqeError,
    DegenerateBasisError,
    DimensionError,
    NumericError,
    PartitionError,
    ResourceLimitError,
    StageError,
    SupportError,
    ValidationError,
)
from .models import (
    FermionTerm,
    InterTerm,
    Partition,
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
    truncated_ladder_op,
)
from .pauli import (
    DENSE_QUBIT_LIMIT,
    DROP_TOLERANCE,
    PauliString,
    PauliSum,
    dense_to_pauli_sum,
    op_norm,
    pauli_mul,
    to_dense,
)
from .statevector import (
    AnsatzSpec,
    StateVector,
    energy_and_gradient,
    expectation,
    finite_difference_gradient,
    overlap,
    parameter_shift_gradient,
    run_ansatz,
    transition,
)
from .cli import RunConfig, RunReport, emit_report, run_pipeline

__version__ = "0.1.0"
