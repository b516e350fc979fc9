"""Exception types shared across the package."""


class GradNewtonError(Exception):
    """Base class for all errors raised by gradnewton."""


class InvalidInputError(GradNewtonError, ValueError):
    """Malformed or non-finite input."""


class DomainError(GradNewtonError):
    """The oracle cannot be evaluated at the requested point."""


class NotPositiveDefiniteError(GradNewtonError):
    """A (reduced) Hessian failed to factor as positive definite."""


class LineSearchStalled(GradNewtonError):
    """Backtracking exhausted its halving budget."""


class MeshError(InvalidInputError):
    """A mesh file is malformed or violates manifold/triangle requirements."""
