"""SPD solves on the subspace where the Hessian is definite.

Objectives such as the conformal energy are invariant under adding a constant
to every coordinate, so their Hessian has a one-dimensional nullspace.  Pinning
one coordinate (deleting its row and column) removes it.
"""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.linalg

from gradnewton.errors import InvalidInputError, NotPositiveDefiniteError


@dataclasses.dataclass(frozen=True)
class ConstraintSpec:
    """Which coordinate, if any, is held fixed.  ``None`` means unconstrained."""

    pinned_index: int | None = 0

    @classmethod
    def none(cls) -> "ConstraintSpec":
        return cls(None)

    def validate(self, n: int) -> None:
        if self.pinned_index is not None and not 0 <= self.pinned_index < n:
            raise InvalidInputError(
                f"pinned index {self.pinned_index} out of range for dimension {n}"
            )

    def free_indices(self, n: int) -> np.ndarray:
        self.validate(n)
        idx = np.arange(n)
        if self.pinned_index is None:
            return idx
        return np.delete(idx, self.pinned_index)


def reduce(H, g, c: ConstraintSpec):
    """Delete the pinned row/column of ``H`` and entry of ``g``."""
    H = np.asarray(H, dtype=float)
    g = np.asarray(g, dtype=float)
    keep = c.free_indices(g.shape[0])
    return H[np.ix_(keep, keep)], g[keep]


def expand(x_reduced, n: int, c: ConstraintSpec) -> np.ndarray:
    """Inverse of :func:`reduce` for vectors: re-insert 0 at the pinned slot."""
    out = np.zeros(n)
    out[c.free_indices(n)] = x_reduced
    return out


def spd_solve(A, b) -> np.ndarray:
    """Solve ``A x = b`` by Cholesky; raise if ``A`` is not positive definite."""
    if A.shape[0] == 0:
        return np.zeros(0)
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"Cholesky factorization failed: {exc}") from exc
    return scipy.linalg.cho_solve(factor, b)


def newton_direction(H, g, c: ConstraintSpec = ConstraintSpec()) -> np.ndarray:
    """Return ``d = -H^{-1} g`` on the free coordinates, 0 at the pinned one."""
    g = np.asarray(g, dtype=float)
    Hr, gr = reduce(H, g, c)
    dr = spd_solve(Hr, -gr)
    resid = np.linalg.norm(Hr @ dr + gr)
    if resid > 1e-10 * np.linalg.norm(g):
        raise NotPositiveDefiniteError(
            f"Newton system residual {resid:.3e} too large; Hessian is numerically singular"
        )
    return expand(dr, g.shape[0], c)


def eigen_bounds(H, c: ConstraintSpec = ConstraintSpec()) -> tuple[float, float]:
    """Smallest and largest eigenvalue of the reduced symmetric matrix.

    For a symmetric positive definite matrix these coincide with the extreme
    singular values, so the result can be used directly as strong-convexity
    and smoothness constants.
    """
    H = np.asarray(H, dtype=float)
    keep = c.free_indices(H.shape[0])
    w = np.linalg.eigvalsh(H[np.ix_(keep, keep)])
    return float(w[0]), float(w[-1])
