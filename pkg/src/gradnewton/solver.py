"""Newton's method with a line search that never evaluates the objective.

The step along the Newton direction ``d`` is chosen from the directional
derivative ``gt(t) = d . grad f(u + t d)`` alone:

* accept the full step if ``(gt(1/2) + gt(1)) / 2 <= alpha * gt(0)``
  (an Armijo-like test phrased with slopes only);
* otherwise halve ``t`` starting from 1/2 until ``gt(t) <= 0``.

:func:`solve_armijo_baseline` is the classical energy-based backtracking
Newton method, kept only as a point of comparison.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
from typing import NamedTuple

import numpy as np

from gradnewton.errors import (
    DomainError,
    InvalidInputError,
    LineSearchStalled,
    NotPositiveDefiniteError,
)
from gradnewton.linalg import ConstraintSpec, newton_direction
from gradnewton.oracle import EvalCounters, Oracle, as_point, gradient_norm

logger = logging.getLogger("gradnewton")


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max-iterations"
    STALLED = "line-search-stalled"
    NOT_PD = "not-positive-definite"
    DOMAIN_ERROR = "domain-error"


class ExitCondition(str, enum.Enum):
    FIRST_CONDITION = "first-condition"
    SIGN_CONDITION = "sign-condition"
    FULL_STEP = "full-step"
    ARMIJO = "armijo"


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """Run parameters.

    ``alpha`` must lie in (0, 1/2).  Note that on an exactly quadratic
    objective the slope average at the full Newton step is ``-lambda^2 / 4``,
    so unit steps pass the first condition only for ``alpha <= 1/4``.

    ``constraint=None`` defers to the oracle's own ``natural_constraint``.
    """

    alpha: float = 0.1
    epsilon: float = 1e-10
    max_iterations: int = 200
    max_halvings: int = 60
    use_first_condition: bool = True
    constraint: ConstraintSpec | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 0.5:
            raise InvalidInputError(f"alpha must lie in (0, 1/2), got {self.alpha}")
        if not self.epsilon > 0.0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iterations < 1 or self.max_halvings < 1:
            raise InvalidInputError("max_iterations and max_halvings must be >= 1")

    def constraint_for(self, oracle: Oracle) -> ConstraintSpec:
        if self.constraint is not None:
            return self.constraint
        return getattr(oracle, "natural_constraint", ConstraintSpec.none())


@dataclasses.dataclass(frozen=True)
class IterationRecord:
    k: int
    grad_norm: float
    lambda_sq: float
    step: float
    halvings: int
    exit_condition: ExitCondition
    energy: float | None = None


@dataclasses.dataclass(frozen=True)
class SolveResult:
    final_point: np.ndarray
    status: Status
    trace: tuple[IterationRecord, ...]
    counters: EvalCounters
    # u_0, ..., u_K: one more entry than ``trace``
    path: tuple[np.ndarray, ...]
    final_grad_norm: float
    failed_at: int | None = None
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def iterations(self) -> int:
        return len(self.trace)

    def grad_norms(self) -> np.ndarray:
        """Gradient norms at every point of ``path``."""
        return np.array([r.grad_norm for r in self.trace] + [self.final_grad_norm])


class LineSearchOutcome(NamedTuple):
    step: float
    halvings: int
    exit_condition: ExitCondition


def newton_decrement_sq(d, g) -> float:
    """Return ``lambda^2 = -d . g`` for a Newton direction ``d``."""
    lam2 = -float(np.dot(d, g))
    if lam2 < -1e-8:
        raise NotPositiveDefiniteError(
            f"Newton direction is not a descent direction (d.g = {-lam2:.3e})"
        )
    return max(lam2, 0.0)


def line_search(
    oracle: Oracle, u, d, cfg: SolverConfig, slope0: float | None = None
) -> LineSearchOutcome:
    """Pick a step along ``d`` from directional derivatives only.

    ``slope0`` is ``d . grad f(u)``; pass it when the caller already holds the
    gradient at ``u`` to avoid one oracle call.
    """
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)

    def slope(t):
        return float(d @ oracle.gradient(u + t * d))

    if cfg.use_first_condition:
        if slope0 is None:
            slope0 = slope(0.0)
        s_half = slope(0.5)
        s_one = slope(1.0)
        if 0.5 * (s_half + s_one) <= cfg.alpha * slope0:
            return LineSearchOutcome(1.0, 0, ExitCondition.FIRST_CONDITION)
        if s_half <= 0.0:
            return LineSearchOutcome(0.5, 1, ExitCondition.SIGN_CONDITION)
        halvings = 2
    else:
        if slope(1.0) <= 0.0:
            return LineSearchOutcome(1.0, 0, ExitCondition.FULL_STEP)
        halvings = 1

    while halvings <= cfg.max_halvings:
        t = 2.0**-halvings
        if slope(t) <= 0.0:
            return LineSearchOutcome(t, halvings, ExitCondition.SIGN_CONDITION)
        halvings += 1
    raise LineSearchStalled(f"no step found after {cfg.max_halvings} halvings")


def _armijo_search(oracle: Oracle, u, d, g, cfg: SolverConfig) -> LineSearchOutcome:
    f0 = oracle.energy(u)
    slope0 = float(d @ g)
    for halvings in range(cfg.max_halvings + 1):
        t = 2.0**-halvings
        if oracle.energy(u + t * d) <= f0 + cfg.alpha * t * slope0:
            cond = ExitCondition.FULL_STEP if halvings == 0 else ExitCondition.ARMIJO
            return LineSearchOutcome(t, halvings, cond)
    raise LineSearchStalled(f"no Armijo step found after {cfg.max_halvings} halvings")


def _newton_loop(oracle: Oracle, u0, cfg: SolverConfig, search) -> SolveResult:
    start = oracle.counters
    constraint = cfg.constraint_for(oracle)
    u = as_point(u0, oracle.dimension)
    constraint.validate(oracle.dimension)
    path = [u]
    trace: list[IterationRecord] = []
    gnorm = float("nan")
    status = Status.MAX_ITERATIONS
    failed_at = None
    message = ""

    k = 0
    try:
        while True:
            g = oracle.gradient(u)
            gnorm = gradient_norm(g)
            if gnorm <= cfg.epsilon:
                status = Status.CONVERGED
                break
            if k >= cfg.max_iterations:
                message = f"gradient norm {gnorm:.3e} after {k} iterations"
                break
            H = oracle.hessian(u)
            d = newton_direction(H, g, constraint)
            lam2 = newton_decrement_sq(d, g)
            ls = search(oracle, u, d, g, cfg)
            logger.debug(
                "k=%d |g|=%.3e lambda^2=%.3e t=%g (%s)",
                k, gnorm, lam2, ls.step, ls.exit_condition.value,
            )
            trace.append(
                IterationRecord(k, gnorm, lam2, ls.step, ls.halvings, ls.exit_condition)
            )
            u = as_point(u + ls.step * d)
            path.append(u)
            k += 1
    except NotPositiveDefiniteError as exc:
        status, failed_at, message = Status.NOT_PD, k, str(exc)
    except LineSearchStalled as exc:
        status, failed_at, message = Status.STALLED, k, str(exc)
    except DomainError as exc:
        status, failed_at, message = Status.DOMAIN_ERROR, k, str(exc)

    if status is not Status.CONVERGED:
        logger.info("solve ended with %s at iteration %d: %s", status.value, k, message)
    return SolveResult(
        final_point=u,
        status=status,
        trace=tuple(trace),
        counters=oracle.counters - start,
        path=tuple(path),
        final_grad_norm=gnorm,
        failed_at=failed_at,
        message=message,
    )


def solve(oracle: Oracle, u0, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Minimize with the gradient-only line search.  Never calls ``oracle.energy``.

    The gradient is evaluated once per outer iteration and its directional
    slope is handed to the line search.
    """

    def search(oracle, u, d, g, cfg):
        return line_search(oracle, u, d, cfg, slope0=float(d @ g))

    return _newton_loop(oracle, u0, cfg, search)


def solve_armijo_baseline(oracle: Oracle, u0, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Same Newton loop, classical sufficient-decrease backtracking on the energy."""
    if not oracle.has_energy:
        raise InvalidInputError("the Armijo baseline needs an oracle with an energy")
    return _newton_loop(oracle, u0, cfg, _armijo_search)
