"""Exception hierarchy shared by all modules."""


class LocalFieldError(Exception):
    """Base class for package errors."""


class DomainError(LocalFieldError, ValueError):
    """Argument outside the domain of a function."""


class UnsupportedOrderError(LocalFieldError, ValueError):
    """Requested multipole order is not supported."""


class SingularityError(LocalFieldError, ValueError):
    """Evaluation at a coincident point where the kernel is singular."""


class ExpansionUndefinedError(LocalFieldError, ValueError):
    """Two-center expansion requested on the equal-radius shell."""


class ConvergenceError(LocalFieldError, ArithmeticError):
    """Extrapolated estimates failed to settle within tolerance."""


class PoleError(LocalFieldError, ZeroDivisionError):
    """Argument at or beyond the pole of a rational relation."""


class PackingError(LocalFieldError, RuntimeError):
    """Rejection sampling could not place all atoms."""


class SolverError(LocalFieldError, ArithmeticError):
    """Dense linear solve failed."""
