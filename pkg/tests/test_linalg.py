import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import triangle_laplacian
from gradnewton.errors import InvalidInputError, NotPositiveDefiniteError
from gradnewton.linalg import ConstraintSpec, eigen_bounds, expand, newton_direction, reduce
from gradnewton.problems import random_spd

NONE = ConstraintSpec.none()


class TestReduce:
    def test_identity_pin_zero(self):
        Hr, gr = reduce(np.eye(2), [1.0, 2.0], ConstraintSpec(0))
        np.testing.assert_array_equal(Hr, [[1.0]])
        np.testing.assert_array_equal(gr, [2.0])

    def test_laplacian_minor(self):
        Hr, _ = reduce(triangle_laplacian(), np.zeros(3), ConstraintSpec(0))
        np.testing.assert_array_equal(Hr, [[2.0, -1.0], [-1.0, 2.0]])
        assert np.linalg.eigvalsh(Hr)[0] > 0

    def test_no_pin_is_identity(self):
        H = random_spd(4, seed=3)
        g = np.arange(4.0)
        Hr, gr = reduce(H, g, NONE)
        np.testing.assert_array_equal(Hr, H)
        np.testing.assert_array_equal(gr, g)

    def test_bad_index(self):
        with pytest.raises(InvalidInputError):
            reduce(np.eye(2), [1.0, 2.0], ConstraintSpec(2))

    def test_expand_round_trip(self):
        x = expand(np.array([5.0, 6.0]), 3, ConstraintSpec(1))
        np.testing.assert_array_equal(x, [5.0, 0.0, 6.0])


class TestNewtonDirection:
    def test_diagonal(self):
        d = newton_direction(np.diag([2.0, 8.0]), [2.0, 8.0], NONE)
        np.testing.assert_allclose(d, [-1.0, -1.0], rtol=1e-15)

    def test_identity_gives_minus_gradient(self, rng):
        g = rng.standard_normal(5)
        np.testing.assert_allclose(newton_direction(np.eye(5), g, NONE), -g, rtol=1e-15)

    def test_pinned_laplacian(self):
        # by hand: [[2,-1],[-1,2]] x = -(1,-1)  ->  x = (-1/3, 1/3)
        d = newton_direction(triangle_laplacian(), [0.0, 1.0, -1.0], ConstraintSpec(0))
        np.testing.assert_allclose(d, [0.0, -1 / 3, 1 / 3], rtol=1e-14, atol=1e-16)
        assert d[0] == 0.0

    def test_singular_without_pin_raises(self):
        with pytest.raises(NotPositiveDefiniteError):
            newton_direction(triangle_laplacian(), [0.0, 1.0, -1.0], NONE)

    def test_indefinite_raises(self):
        with pytest.raises(NotPositiveDefiniteError):
            newton_direction(np.diag([1.0, -1.0]), [1.0, 1.0], NONE)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6), n=st.integers(1, 8), pin=st.booleans())
    def test_descent_and_residual(self, seed, n, pin):
        H = random_spd(n, seed=seed, cond=100.0)
        g = np.random.default_rng(seed).standard_normal(n)
        c = ConstraintSpec(0) if pin and n > 1 else NONE
        d = newton_direction(H, g, c)
        Hr, gr = reduce(H, g, c)
        dr = d[c.free_indices(n)]
        assert np.linalg.norm(Hr @ dr + gr) <= 1e-10 * np.linalg.norm(g)
        if np.linalg.norm(gr) > 0:
            assert d @ g < 0
        if c.pinned_index is not None:
            assert d[c.pinned_index] == 0.0


class TestEigenBounds:
    def test_diag(self):
        assert eigen_bounds(np.diag([1.0, 4.0]), NONE) == pytest.approx((1.0, 4.0), rel=1e-8)

    def test_identity(self):
        assert eigen_bounds(np.eye(6), NONE) == pytest.approx((1.0, 1.0), rel=1e-8)

    def test_pinned_laplacian(self):
        # characteristic polynomial of [[2,-1],[-1,2]]: (2-x)^2 - 1 -> x = 1, 3
        assert eigen_bounds(triangle_laplacian(), ConstraintSpec(0)) == pytest.approx((1.0, 3.0), rel=1e-8)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10**6))
    def test_positive_for_spd(self, seed):
        lo, hi = eigen_bounds(random_spd(5, seed=seed), NONE)
        assert 0 < lo <= hi
