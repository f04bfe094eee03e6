"""Exception types raised by the solvers."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition (non-Hermitian, zero vector, ...)."""


class SingularPencilError(InvalidInputError):
    """The right-hand matrix of a generalized eigenproblem is not positive definite."""


class InfeasibleError(ValueError):
    """The requested subproblem has an empty feasible set."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap.

    The last residual is kept on ``residual`` so callers can decide whether
    the iterate is still usable.
    """

    def __init__(self, message, residual=float("nan"), iteration=None):
        super().__init__(message)
        self.residual = residual
        self.iteration = iteration


class DegenerateRangeError(ValueError):
    """The beta range for the upper bound is empty, i.e. inputs are inconsistent."""
