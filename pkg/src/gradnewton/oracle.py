"""Objective oracles and evaluation bookkeeping.

Every concrete objective subclasses :class:`Oracle` and implements the
private ``_gradient`` / ``_hessian`` (and optionally ``_energy``) hooks.  The
public methods validate inputs and outputs and bump the matching counter, so
any solver that only talks to the public surface is automatically audited.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from gradnewton.errors import InvalidInputError


@dataclasses.dataclass(frozen=True)
class EvalCounters:
    energy_evals: int = 0
    gradient_evals: int = 0
    hessian_evals: int = 0

    def __sub__(self, other: "EvalCounters") -> "EvalCounters":
        return EvalCounters(
            self.energy_evals - other.energy_evals,
            self.gradient_evals - other.gradient_evals,
            self.hessian_evals - other.hessian_evals,
        )

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def as_point(u, n: int | None = None) -> np.ndarray:
    """Copy ``u`` into a read-only float vector, checking length and finiteness."""
    arr = np.array(u, dtype=float).reshape(-1)
    if n is not None and arr.shape[0] != n:
        raise InvalidInputError(f"expected a point of length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("point has non-finite entries")
    arr.setflags(write=False)
    return arr


class Oracle:
    """Supplies gradient and Hessian of a smooth convex function.

    Subclasses set ``dimension`` and implement ``_gradient`` and ``_hessian``.
    Objectives with a computable value also implement ``_energy`` and set
    ``has_energy = True``; the energy is only ever consulted by validation
    tooling and the Armijo baseline.
    """

    dimension: int
    has_energy: bool = False

    def __init__(self, dimension: int):
        self.dimension = int(dimension)
        self._energy_evals = 0
        self._gradient_evals = 0
        self._hessian_evals = 0

    @property
    def counters(self) -> EvalCounters:
        return EvalCounters(self._energy_evals, self._gradient_evals, self._hessian_evals)

    def reset_counters(self) -> None:
        self._energy_evals = self._gradient_evals = self._hessian_evals = 0

    def energy(self, u) -> float:
        if not self.has_energy:
            raise NotImplementedError(f"{type(self).__name__} has no energy")
        u = as_point(u, self.dimension)
        self._energy_evals += 1
        value = float(self._energy(u))
        if not np.isfinite(value):
            raise InvalidInputError("energy evaluated to a non-finite value")
        return value

    def gradient(self, u) -> np.ndarray:
        u = as_point(u, self.dimension)
        self._gradient_evals += 1
        g = np.asarray(self._gradient(u), dtype=float).reshape(-1)
        if g.shape != (self.dimension,) or not np.all(np.isfinite(g)):
            raise InvalidInputError("gradient is malformed or non-finite")
        g.setflags(write=False)
        return g

    def hessian(self, u) -> np.ndarray:
        u = as_point(u, self.dimension)
        self._hessian_evals += 1
        H = np.asarray(self._hessian(u), dtype=float)
        if H.shape != (self.dimension, self.dimension) or not np.all(np.isfinite(H)):
            raise InvalidInputError("Hessian is malformed or non-finite")
        scale = max(np.abs(H).max(initial=0.0), 1.0)
        if np.abs(H - H.T).max(initial=0.0) > 1e-12 * scale:
            raise InvalidInputError("Hessian is not symmetric")
        H.setflags(write=False)
        return H

    def _energy(self, u: np.ndarray) -> float:
        raise NotImplementedError

    def _gradient(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _hessian(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def gradient_norm(g) -> float:
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise InvalidInputError("gradient has non-finite entries")
    return float(np.linalg.norm(g))


def directional_gradient(oracle: Oracle, u, d, t: float) -> float:
    """Return ``d . grad f(u + t d)``, costing exactly one gradient call."""
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)
    return float(d @ oracle.gradient(u + t * d))


def _mixed_rel_err(approx: np.ndarray, exact: np.ndarray) -> float:
    # falls back to absolute error when the exact value is small (e.g. at a minimizer)
    return float(np.linalg.norm(approx - exact) / max(np.linalg.norm(exact), 1.0))


def fd_gradient(oracle: Oracle, u, h: float | None = None) -> np.ndarray:
    """Central finite differences of the energy."""
    u = np.asarray(u, dtype=float)
    if h is None:
        h = 1e-5 * (1.0 + np.linalg.norm(u))
    out = np.empty_like(u)
    for i in range(u.size):
        e = np.zeros_like(u)
        e[i] = h
        out[i] = (oracle.energy(u + e) - oracle.energy(u - e)) / (2 * h)
    return out


def fd_hessian(oracle: Oracle, u, h: float | None = None) -> np.ndarray:
    """Central finite differences of the gradient (column j = d g / d u_j)."""
    u = np.asarray(u, dtype=float)
    if h is None:
        h = 1e-5 * (1.0 + np.linalg.norm(u))
    cols = []
    for i in range(u.size):
        e = np.zeros_like(u)
        e[i] = h
        cols.append((oracle.gradient(u + e) - oracle.gradient(u - e)) / (2 * h))
    return np.column_stack(cols)


def gradient_check_error(oracle: Oracle, u) -> float:
    return _mixed_rel_err(fd_gradient(oracle, u), oracle.gradient(u))


def hessian_check_error(oracle: Oracle, u) -> float:
    return _mixed_rel_err(fd_hessian(oracle, u), oracle.hessian(u))
