"""Post-hoc checks of the convergence guarantees on a finished solve.

Three quantities drive the analysis of the gradient-only line search:

* ``m``, ``M``: bounds on the Hessian spectrum, so the method is strongly
  convex and smooth along the run;
* ``L``: Lipschitz constant of the Hessian;
* ``alpha``: the line search constant.

From them, :func:`gamma_bound` gives a guaranteed per-step decrease while the
gradient is large, and :func:`eta_threshold` gives a gradient size below which
the unit step is always accepted.  The estimates here are taken over the
visited points only, so they are optimistic; the checks carry slack
accordingly.  A failed check points to a bug, a passed one is evidence.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np

from gradnewton.errors import InvalidInputError
from gradnewton.linalg import ConstraintSpec, eigen_bounds
from gradnewton.oracle import Oracle
from gradnewton.solver import SolveResult, SolverConfig

NOISE_FLOOR = 1e-13
DECREASE_SLACK = 0.1
THRESHOLD_SAFETY = 0.5


def gamma_bound(eta: float, m: float, M: float, alpha: float) -> float:
    """Guaranteed energy decrease of one step taken where ``|grad f| >= eta``."""
    if not 0.0 < m <= M:
        raise InvalidInputError(f"need 0 < m <= M, got m={m}, M={M}")
    if not 0.0 < alpha < 0.5:
        raise InvalidInputError(f"alpha must lie in (0, 1/2), got {alpha}")
    if eta < 0.0:
        raise InvalidInputError("eta must be non-negative")
    return eta * eta * min(m / (4.0 * M * M), alpha / M)


def eta_threshold(m: float, L: float, alpha: float) -> float:
    """Gradient norm below which the full Newton step is guaranteed.

    Returns ``inf`` for ``L == 0`` (constant Hessian).
    """
    if not 0.0 < alpha < 0.5:
        raise InvalidInputError(f"alpha must lie in (0, 1/2), got {alpha}")
    if m <= 0.0 or L < 0.0:
        raise InvalidInputError(f"need m > 0 and L >= 0, got m={m}, L={L}")
    if L == 0.0:
        return math.inf
    return (0.5 - alpha) * 8.0 * m * m / (5.0 * L)


@dataclasses.dataclass(frozen=True)
class BoundEstimates:
    m: float
    M: float
    L: float


def _points(run) -> list[np.ndarray]:
    if isinstance(run, SolveResult):
        return list(run.path)
    return [np.asarray(p, dtype=float) for p in run]


def estimate_bounds(
    oracle: Oracle, run: SolveResult | Sequence, constraint: ConstraintSpec | None = None
) -> BoundEstimates:
    """Hessian spectrum bounds and Lipschitz quotient over the visited points.

    ``L`` is the largest ``||H(u_k) - H(u_{k+1})|| / ||u_k - u_{k+1}||``
    (spectral norm, reduced to the free coordinates) over consecutive points,
    hence a lower bound on the true constant.  A single point gives ``L = 0``.
    """
    points = _points(run)
    if not points:
        raise InvalidInputError("need at least one point")
    if constraint is None:
        constraint = getattr(oracle, "natural_constraint", ConstraintSpec.none())
    keep = constraint.free_indices(oracle.dimension)
    hessians = [np.asarray(oracle.hessian(p))[np.ix_(keep, keep)] for p in points]
    lo, hi = math.inf, -math.inf
    for H in hessians:
        a, b = eigen_bounds(H, ConstraintSpec.none())
        lo, hi = min(lo, a), max(hi, b)
    L = 0.0
    for (p, Hp), (q, Hq) in zip(zip(points, hessians), zip(points[1:], hessians[1:])):
        dist = float(np.linalg.norm((q - p)[keep]))
        if dist > 0.0:
            L = max(L, float(np.linalg.norm(Hq - Hp, 2)) / dist)
    return BoundEstimates(lo, hi, L)


def path_integral(oracle: Oracle, u, v, substeps: int = 64) -> float:
    """``f(v) - f(u)`` from gradients alone (trapezoid rule on the segment)."""
    u = np.asarray(u, dtype=float)
    dv = np.asarray(v, dtype=float) - u
    s = np.linspace(0.0, 1.0, substeps + 1)
    slopes = np.array([dv @ oracle.gradient(u + si * dv) for si in s])
    return float(np.trapezoid(slopes, s))


def energy_decreases(oracle: Oracle, run: SolveResult | Sequence) -> np.ndarray:
    """``f(u_k) - f(u_{k+1})`` for each step.

    Energy differences are used when they are well above round-off in ``f``;
    otherwise (or if the oracle has no energy) the gradient path integral
    stands in.
    """
    points = _points(run)
    out = np.empty(len(points) - 1)
    energies = [oracle.energy(p) for p in points] if oracle.has_energy else None
    for k in range(len(points) - 1):
        if energies is not None:
            diff = energies[k] - energies[k + 1]
            if abs(diff) > 1e-6 * max(1.0, abs(energies[k])):
                out[k] = diff
                continue
        out[k] = -path_integral(oracle, points[k], points[k + 1])
    return out


def audit_descent(oracle: Oracle, run: SolveResult | Sequence) -> list[int]:
    """Indices ``k`` at which the energy failed to decrease strictly."""
    return [int(k) for k in np.flatnonzero(~(energy_decreases(oracle, run) > 0.0))]


def decrease_violations(
    oracle: Oracle,
    result: SolveResult,
    bounds: BoundEstimates,
    alpha: float,
    slack: float = DECREASE_SLACK,
) -> list[dict]:
    """Steps whose decrease falls short of ``(1 - slack) * gamma_bound(|g_k|)``."""
    dec = energy_decreases(oracle, result)
    out = []
    for rec, d in zip(result.trace, dec):
        bound = gamma_bound(rec.grad_norm, bounds.m, bounds.M, alpha)
        if not d >= (1.0 - slack) * bound:
            out.append({"k": rec.k, "decrease": float(d), "bound": bound})
    return out


def full_step_violations(
    result: SolveResult,
    bounds: BoundEstimates,
    cfg: SolverConfig,
    safety: float = THRESHOLD_SAFETY,
) -> list[int]:
    """Iterations below ``safety * eta_threshold`` that did not take ``t = 1``.

    Only meaningful with the first condition enabled; returns ``[]`` otherwise.
    """
    if not cfg.use_first_condition:
        return []
    eta = safety * eta_threshold(bounds.m, bounds.L, cfg.alpha)
    return [r.k for r in result.trace if r.grad_norm <= eta and r.step != 1.0]


def fit_rate(grad_norms, noise_floor: float = NOISE_FLOOR, window: int | None = None):
    """Fit ``g_{k+1} ~ C g_k^p`` in log space.

    Pairs whose successor lies at or below ``noise_floor`` are dropped:
    there the gradient is dominated by round-off and carries no rate
    information.  ``p`` is the least-squares slope over the last ``window``
    usable pairs (all of them if ``None``); ``C2`` is the constant with the
    exponent fixed at 2, fitted over all usable pairs.  Returns
    ``(p, C2, n_pairs)``; ``p`` and ``C2`` are ``None`` for fewer than two
    usable pairs.
    """
    g = np.asarray(grad_norms, dtype=float)
    ok = (g[1:] > noise_floor) & (g[:-1] > 0.0)
    x = np.log(g[:-1][ok])
    y = np.log(g[1:][ok])
    if x.size < 2:
        return None, None, int(x.size)
    C2 = float(np.exp(np.mean(y - 2.0 * x)))
    if window is not None:
        x, y = x[-window:], y[-window:]
    p = float(np.polyfit(x, y, 1)[0])
    return p, C2, int(ok.sum())


@dataclasses.dataclass(frozen=True)
class ConvergenceReport:
    iterations: int
    damped_iterations: int
    k0: int | None
    C: float | None
    p: float | None
    fit_pairs: int
    rate: str
    linear_rate: float | None
    violations: tuple[dict, ...] = ()
    full_step_violations: tuple[int, ...] = ()
    descent_failures: tuple[int, ...] = ()


def quadratic_onset(result: SolveResult) -> int | None:
    """First ``k`` from which every step is 1 and the gradient norm shrinks."""
    g = result.grad_norms()
    k0 = None
    for k in range(result.iterations - 1, -1, -1):
        if result.trace[k].step == 1.0 and g[k + 1] < g[k]:
            k0 = k
        else:
            break
    return k0


def classify_convergence(
    result: SolveResult,
    bounds: BoundEstimates,
    cfg: SolverConfig,
    oracle: Oracle | None = None,
    noise_floor: float = NOISE_FLOOR,
    min_fit_pairs: int = 3,
) -> ConvergenceReport:
    """Locate the onset of full steps and measure the rate beyond it.

    The exponent ``p`` comes from the last ``min_fit_pairs`` resolvable
    gradient-norm pairs after the onset; fewer pairs than that and the fit
    abstains.

    With ``oracle`` given, also checks every step against the guaranteed
    decrease and for strict descent, and the full-step guarantee.
    """
    g = result.grad_norms()
    k0 = quadratic_onset(result)
    p = C = None
    n_pairs = 0
    if k0 is not None:
        p, C, n_pairs = fit_rate(g[k0:], noise_floor, window=min_fit_pairs)
        if n_pairs < min_fit_pairs:
            p = C = None

    resolvable = g[g > noise_floor]
    tail = resolvable[-11:]
    linear_rate = None
    if tail.size >= 2 and np.all(tail > 0):
        linear_rate = float(np.exp(np.mean(np.diff(np.log(tail)))))

    if p is not None and p >= 1.5:
        rate = "quadratic"
    elif linear_rate is not None and linear_rate < 1.0 and k0 is None:
        rate = "linear"
    else:
        rate = "insufficient data"

    violations: list[dict] = []
    descent: list[int] = []
    if oracle is not None and result.iterations:
        violations = decrease_violations(oracle, result, bounds, cfg.alpha)
        descent = audit_descent(oracle, result)
    return ConvergenceReport(
        iterations=result.iterations,
        damped_iterations=k0 if k0 is not None else result.iterations,
        k0=k0,
        C=C,
        p=p,
        fit_pairs=n_pairs,
        rate=rate,
        linear_rate=linear_rate,
        violations=tuple(violations),
        full_step_violations=tuple(full_step_violations(result, bounds, cfg)),
        descent_failures=tuple(descent),
    )


def report_to_dict(bounds: BoundEstimates, report: ConvergenceReport) -> dict:
    return {
        "m": bounds.m,
        "M": bounds.M,
        "L": bounds.L,
        "k0": report.k0,
        "C": report.C,
        "p": report.p,
        "rate": report.rate,
        "linear_rate": report.linear_rate,
        "damped_iterations": report.damped_iterations,
        "violations": list(report.violations),
        "full_step_violations": list(report.full_step_violations),
        "descent_failures": list(report.descent_failures),
    }
