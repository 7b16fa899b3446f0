"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible or non-square shapes."""


class DataError(ValueError):
    """Input contains NaN or Inf entries."""


class SingularityError(ArithmeticError):
    """A matrix required to be positive definite is not."""


class RankError(ValueError):
    """A matrix does not have the rank the operation requires."""


class PreconditionError(ValueError):
    """A solver was invoked outside its domain of validity."""


class FeasibilityError(RuntimeError):
    """The requested design problem has no feasible solution.

    Carries the feasibility margin in watts when known (negative means
    infeasible by that amount).
    """

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class SolverError(RuntimeError):
    """An iterative solver failed to reach its target accuracy."""
