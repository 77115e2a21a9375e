"""Exception types raised across the package."""


class LapspecError(Exception):
    pass


class InvalidDimensionError(LapspecError, ValueError):
    pass


class InvalidArgumentError(LapspecError, ValueError):
    pass


class DomainError(LapspecError, ValueError):
    """Argument outside the function's domain (e.g. ``Im z <= 0``)."""


class SolverFailure(LapspecError, RuntimeError):
    """Eigensolver iteration cap hit; ``index`` is the unconverged eigenvalue."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


class NonConvergenceError(LapspecError, RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class RootNotFoundError(LapspecError, RuntimeError):
    pass


class TrialFailure(LapspecError, RuntimeError):
    """A Monte Carlo trial raised; ``trial`` is its index, ``cause`` the original error."""

    def __init__(self, trial: int, cause: Exception):
        super().__init__(f"trial {trial}: {type(cause).__name__}: {cause}")
        self.trial = trial
        self.cause = cause

    def __reduce__(self):
        return (TrialFailure, (self.trial, self.cause))
