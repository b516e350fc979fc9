"""Newton minimization with a line search that only looks at gradients."""

from gradnewton.errors import (
    DomainError,
    InvalidInputError,
    LineSearchStalled,
    NotPositiveDefiniteError,
)
from gradnewton.linalg import ConstraintSpec, eigen_bounds, newton_direction, reduce
from gradnewton.oracle import EvalCounters, Oracle, directional_gradient, gradient_norm
from gradnewton.solver import (
    ExitCondition,
    IterationRecord,
    SolverConfig,
    SolveResult,
    Status,
    line_search,
    newton_decrement_sq,
    solve,
    solve_armijo_baseline,
)

__all__ = [
    "ConstraintSpec",
    "DomainError",
    "EvalCounters",
    "ExitCondition",
    "InvalidInputError",
    "IterationRecord",
    "LineSearchStalled",
    "NotPositiveDefiniteError",
    "Oracle",
    "SolveResult",
    "SolverConfig",
    "Status",
    "directional_gradient",
    "eigen_bounds",
    "gradient_norm",
    "line_search",
    "newton_decrement_sq",
    "newton_direction",
    "reduce",
    "solve",
    "solve_armijo_baseline",
]
