"""Analytic test objectives.

All fixtures are deterministic; randomized ones take an explicit seed.
"""

from __future__ import annotations

import numpy as np
import scipy.special

from gradnewton.errors import DomainError, InvalidInputError
from gradnewton.oracle import Oracle


class QuadraticProblem(Oracle):
    """``f(u) = 1/2 u.A.u - b.u`` with ``A`` symmetric positive definite."""

    has_energy = True

    def __init__(self, A, b=None):
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise InvalidInputError("A must be a square matrix")
        if not np.allclose(A, A.T, rtol=1e-12, atol=0.0):
            raise InvalidInputError("A must be symmetric")
        if np.linalg.eigvalsh(A)[0] <= 0.0:
            raise InvalidInputError("A must be positive definite")
        super().__init__(A.shape[0])
        self.A = A
        self.b = np.zeros(A.shape[0]) if b is None else np.array(b, dtype=float)
        self.A.setflags(write=False)
        self.b.setflags(write=False)

    @property
    def minimizer(self) -> np.ndarray:
        return np.linalg.solve(self.A, self.b)

    def _energy(self, u):
        return 0.5 * u @ self.A @ u - self.b @ u

    def _gradient(self, u):
        return self.A @ u - self.b

    def _hessian(self, u):
        return self.A.copy()


class LogSumExpProblem(Oracle):
    """``f(u) = log sum_i exp(a_i . u + c_i)``."""

    has_energy = True

    def __init__(self, rows, offsets=None):
        rows = np.atleast_2d(np.array(rows, dtype=float))
        if rows.shape[0] < 1 or not np.all(np.isfinite(rows)):
            raise InvalidInputError("need at least one finite row")
        offsets = np.zeros(rows.shape[0]) if offsets is None else np.array(offsets, dtype=float)
        if offsets.shape != (rows.shape[0],) or not np.all(np.isfinite(offsets)):
            raise InvalidInputError("offsets must be finite, one per row")
        super().__init__(rows.shape[1])
        self.rows = rows
        self.offsets = offsets

    def _weights(self, u):
        return scipy.special.softmax(self.rows @ u + self.offsets)

    def _energy(self, u):
        return scipy.special.logsumexp(self.rows @ u + self.offsets)

    def _gradient(self, u):
        return self._weights(u) @ self.rows

    def _hessian(self, u):
        p = self._weights(u)
        mean = p @ self.rows
        H = (self.rows * p[:, None]).T @ self.rows - np.outer(mean, mean)
        return 0.5 * (H + H.T)


class CubicCounterexample(Oracle):
    """``f(x) = x^2 + eps x^3``, restricted to its convex side ``x > -1/(3 eps)``.

    Approaching 0 from below, the full Newton step lands at roughly
    ``1.5 eps x^2 > 0`` where the slope is already positive, so a pure
    sign-based search always falls back to ``t = 1/2``.
    """

    has_energy = True

    def __init__(self, eps: float = 0.1):
        if not eps > 0.0:
            raise InvalidInputError("eps must be positive")
        super().__init__(1)
        self.eps = float(eps)

    @property
    def lower_limit(self) -> float:
        return -1.0 / (3.0 * self.eps)

    def _check(self, x):
        if x <= self.lower_limit:
            raise DomainError(
                f"x = {x!r} outside the convex region x > {self.lower_limit!r}"
            )

    def _energy(self, u):
        x = u[0]
        self._check(x)
        return x * x + self.eps * x**3

    def _gradient(self, u):
        x = u[0]
        self._check(x)
        return np.array([2.0 * x + 3.0 * self.eps * x * x])

    def _hessian(self, u):
        x = u[0]
        self._check(x)
        return np.array([[2.0 + 6.0 * self.eps * x]])


def make_quadratic(A, b=None) -> QuadraticProblem:
    return QuadraticProblem(A, b)


def make_logsumexp(rows, offsets=None) -> LogSumExpProblem:
    return LogSumExpProblem(rows, offsets)


def make_cubic(eps: float = 0.1) -> CubicCounterexample:
    return CubicCounterexample(eps)


def random_spd(n: int, seed: int = 0, cond: float = 10.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    w = np.geomspace(1.0, cond, n)
    A = (Q * w) @ Q.T
    return 0.5 * (A + A.T)


def logsumexp_fixture(n: int, seed: int = 0) -> LogSumExpProblem:
    """Rows ``+-e_i`` plus one skewed row, with seeded offsets.

    The ``+-e_i`` rows make every sublevel set bounded and the Hessian
    positive definite everywhere.
    """
    rng = np.random.default_rng(seed)
    eye = np.eye(n)
    skew = rng.uniform(0.5, 1.5, n) * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    rows = np.vstack([eye, -eye, skew])
    offsets = rng.uniform(-1.0, 1.0, rows.shape[0])
    return LogSumExpProblem(rows, offsets)


def _fixture_table():
    return {
        "quadratic-diag": (lambda seed: make_quadratic(np.diag([1.0, 4.0])), [1.0, 1.0]),
        "quadratic-random": (
            lambda seed: make_quadratic(
                random_spd(5, seed), np.random.default_rng(seed + 1).standard_normal(5)
            ),
            np.zeros(5),
        ),
        "logsumexp-std": (lambda seed: logsumexp_fixture(3, seed), np.ones(3)),
        "logsumexp-10": (lambda seed: logsumexp_fixture(10, seed), np.ones(10)),
    }


FIXTURE_NAMES = ("quadratic-diag", "quadratic-random", "logsumexp-std", "logsumexp-10", "cubic-<eps>")


def get_fixture(name: str, seed: int = 0) -> tuple[Oracle, np.ndarray]:
    """Look up an analytic fixture by name; returns ``(oracle, default start)``.

    ``cubic-<eps>`` (e.g. ``cubic-0.1``) builds the counterexample with that
    ``eps`` and default start ``-0.5``.
    """
    if name.startswith("cubic-"):
        try:
            eps = float(name[len("cubic-"):])
        except ValueError:
            raise InvalidInputError(f"bad cubic fixture name {name!r}") from None
        return make_cubic(eps), np.array([-0.5])
    table = _fixture_table()
    if name not in table:
        raise InvalidInputError(
            f"unknown problem {name!r}; choose from {', '.join(FIXTURE_NAMES)}"
        )
    factory, x0 = table[name]
    return factory(seed), np.array(x0, dtype=float)
