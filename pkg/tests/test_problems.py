import numpy as np
import pytest

from gradnewton.errors import DomainError, InvalidInputError
from gradnewton.linalg import ConstraintSpec, eigen_bounds
from gradnewton.problems import (
    get_fixture,
    logsumexp_fixture,
    make_cubic,
    make_logsumexp,
    make_quadratic,
)
from gradnewton.solver import SolverConfig, solve


class TestQuadratic:
    def test_gradient(self):
        np.testing.assert_array_equal(make_quadratic(np.eye(2)).gradient([1.0, 2.0]), [1.0, 2.0])

    def test_one_newton_step_from_anywhere(self, rng):
        oracle = make_quadratic(np.diag([1.0, 4.0]))
        for _ in range(10):
            res = solve(oracle, rng.uniform(-100, 100, 2))
            assert res.converged and res.iterations == 1 and res.trace[0].step == 1.0

    def test_eigen_bounds(self):
        H = make_quadratic(np.diag([1.0, 4.0])).hessian([0.0, 0.0])
        assert eigen_bounds(H, ConstraintSpec.none()) == pytest.approx((1.0, 4.0))

    def test_minimizer(self):
        q, _ = get_fixture("quadratic-random")
        np.testing.assert_allclose(q.gradient(q.minimizer), 0.0, atol=1e-12)

    @pytest.mark.parametrize("A", [np.diag([1.0, -1.0]), np.zeros((2, 2)), [[1.0, 2.0], [0.0, 1.0]]])
    def test_rejects_bad_matrix(self, A):
        with pytest.raises(InvalidInputError):
            make_quadratic(A)


class TestLogSumExp:
    def test_symmetric_pair(self):
        oracle = make_logsumexp([[1.0], [-1.0]])
        assert oracle.gradient([0.0])[0] == 0.0
        # p = (1/2, 1/2): sum p a^2 = 1, mean = 0
        assert oracle.hessian([0.0])[0, 0] == pytest.approx(1.0, rel=1e-15)

    def test_no_overflow(self):
        oracle = make_logsumexp([[1.0], [-1.0]])
        assert oracle.energy([800.0]) == pytest.approx(800.0 + np.log1p(np.exp(-1600.0)))
        assert np.isfinite(oracle.hessian([800.0])).all()

    def test_rejects_empty(self):
        with pytest.raises(InvalidInputError):
            make_logsumexp(np.zeros((0, 2)))

    def test_fixture_is_positive_definite(self, rng):
        oracle = logsumexp_fixture(10, seed=0)
        for _ in range(5):
            lo, _ = eigen_bounds(oracle.hessian(rng.uniform(-3, 3, 10)), ConstraintSpec.none())
            assert lo > 0


class TestCubic:
    def test_values(self):
        c = make_cubic(0.1)
        assert c.gradient([-0.5])[0] == pytest.approx(-0.925, rel=1e-15)
        assert c.hessian([-0.5])[0, 0] == pytest.approx(1.7, rel=1e-15)
        assert -c.gradient([-0.5])[0] / c.hessian([-0.5])[0, 0] == pytest.approx(0.544117647, rel=1e-8)
        assert c.gradient([0.0])[0] == 0.0

    def test_domain_guard(self):
        c = make_cubic(0.1)
        with pytest.raises(DomainError):
            c.gradient([-10 / 3])
        with pytest.raises(DomainError):
            c.hessian([-5.0])

    def test_rejects_nonpositive_eps(self):
        with pytest.raises(InvalidInputError):
            make_cubic(0.0)

    def test_full_step_overshoots(self):
        c = make_cubic(0.1)
        x = -0.01
        d = -c.gradient([x])[0] / c.hessian([x])[0, 0]
        x_new = x + d
        # second-order expansion: x_new ~ 1.5 eps x^2
        assert x_new == pytest.approx(1.5 * 0.1 * x * x, rel=0.02)
        assert c.gradient([x_new])[0] > 0

    @pytest.mark.parametrize("x0", [-0.5, -0.2, -0.05, -0.01])
    def test_sign_only_tail_ratio(self, x0):
        res = solve(make_cubic(0.1), [x0], SolverConfig(use_first_condition=False))
        assert res.converged
        tail = res.trace[-5:]
        assert all(r.step == 0.5 for r in tail)
        xs = np.array([p[0] for p in res.path])
        np.testing.assert_allclose(xs[-5:] / xs[-6:-1], 0.5, atol=1e-3)

    @pytest.mark.parametrize("alpha", [0.05, 0.1, 0.2, 0.24, 0.249, 0.25 - 1e-9])
    def test_first_condition_eventually_full_steps(self, alpha):
        res = solve(make_cubic(0.1), [-0.5], SolverConfig(alpha=alpha))
        assert res.converged
        assert res.trace[-1].step == 1.0
        g = res.grad_norms()
        assert g[-1] <= 1e-10 and g[-1] <= g[-2] ** 2

    def test_full_step_onset_moves_later_as_alpha_nears_quarter(self):
        onsets = []
        for alpha in [0.1, 0.2, 0.24, 0.249, 0.2499]:
            res = solve(make_cubic(0.1), [-0.5], SolverConfig(alpha=alpha))
            onsets.append(next(r.k for r in res.trace if r.step == 1.0))
        assert onsets == sorted(onsets) and onsets[-1] > onsets[0]


def test_fixture_lookup():
    oracle, x0 = get_fixture("cubic-0.25")
    assert oracle.eps == 0.25 and x0.tolist() == [-0.5]
    with pytest.raises(InvalidInputError):
        get_fixture("cubic-abc")
    with pytest.raises(InvalidInputError):
        get_fixture("nonsense")


def test_seeded_fixtures_are_deterministic():
    a, _ = get_fixture("quadratic-random", seed=4)
    b, _ = get_fixture("quadratic-random", seed=4)
    np.testing.assert_array_equal(a.A, b.A)
    np.testing.assert_array_equal(a.b, b.b)
