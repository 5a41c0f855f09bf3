"""Exception hierarchy shared by all propwing modules.

Exit-code mapping used by the CLI: validation/parse errors -> 2,
convergence failures -> 3, I/O errors -> 4.
"""


class PropwingError(Exception):
    """Base class for all propwing errors."""


class ValidationError(PropwingError):
    """Input data or configuration violates a documented precondition."""


class ParseError(ValidationError):
    """A data file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FitError(ValidationError):
    """A model fit is degenerate or under-determined."""


class SolverError(PropwingError):
    """The lifting-line collocation system could not be solved."""


class ConvergenceError(PropwingError):
    """An iterative scheme failed to converge; carries the last residual."""

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (last residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class CaseError(PropwingError):
    """A case run failed; tags the failing case and stage."""

    def __init__(self, case: str, stage: str, cause: Exception):
        super().__init__(f"case {case} [{stage}]: {cause}")
        self.case = case
        self.stage = stage
        self.cause = cause
