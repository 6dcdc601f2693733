"""Exception taxonomy shared by all modules."""


class DeepVqeError(Exception):
    """Base class for all package errors."""


class DimensionError(DeepVqeError):
    """Mismatched qubit counts or matrix dimensions."""


class ResourceLimitError(DeepVqeError):
    """Operation would exceed a configured resource limit (e.g. dense matrix size)."""


class SupportError(DeepVqeError):
    """Operator acts outside the qubit set it is allowed to touch."""


class DegenerateBasisError(DeepVqeError):
    """Raw basis has numerical rank zero; no orthonormal basis exists."""


class ArityError(DeepVqeError):
    """Interaction term couples three or more subsystems; only pairwise is supported."""


class PartitionError(DeepVqeError):
    """Invalid subsystem partition."""


class ConvergenceError(DeepVqeError):
    """Iterative solver failed to converge; carries the final residual."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NumericError(DeepVqeError):
    """Non-finite value encountered; carries the offending parameters."""

    def __init__(self, message: str, params=None):
        super().__init__(message)
        self.params = params


class ValidationError(DeepVqeError):
    """Invalid input data (file contents, configuration, preconditions)."""


class StageError(DeepVqeError):
    """Pipeline stage failure wrapper carrying the stage tag."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
