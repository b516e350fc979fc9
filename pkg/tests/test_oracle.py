import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradnewton.errors import InvalidInputError
from gradnewton.oracle import (
    directional_gradient,
    fd_hessian,
    gradient_check_error,
    gradient_norm,
    hessian_check_error,
)
from gradnewton.problems import get_fixture, make_cubic, make_quadratic


@pytest.mark.parametrize(
    "g, expected", [((3.0, 4.0), 5.0), ((0.0, 0.0, 0.0), 0.0), ((1.0, 1.0, 1.0, 1.0), 2.0)]
)
def test_gradient_norm(g, expected):
    assert gradient_norm(np.array(g)) == expected


def test_gradient_norm_rejects_nan():
    with pytest.raises(InvalidInputError):
        gradient_norm([1.0, np.nan])


class TestDirectionalGradient:
    def test_half_unit_quadratic(self):
        oracle = make_quadratic(np.eye(1))
        assert directional_gradient(oracle, [1.0], [-1.0], 0.0) == -1.0
        assert directional_gradient(oracle, [1.0], [-1.0], 1.0) == 0.0

    def test_cubic_overshoot(self):
        oracle = make_cubic(0.1)
        # by hand: x = -0.5 + 0.5441 = 0.0441, f'(x) = 2x + 0.3x^2
        x = 0.0441
        expected = 0.5441 * (2 * x + 0.3 * x * x)
        val = directional_gradient(oracle, [-0.5], [0.5441], 1.0)
        assert val == pytest.approx(expected, rel=1e-12)
        assert val == pytest.approx(0.0483, abs=1e-4)

    def test_costs_one_gradient_call(self):
        oracle = make_cubic(0.1)
        before = oracle.counters
        directional_gradient(oracle, [-0.5], [0.3], 0.7)
        diff = oracle.counters - before
        assert (diff.gradient_evals, diff.hessian_evals, diff.energy_evals) == (1, 0, 0)

    def test_matches_full_gradient_bitwise(self, rng):
        oracle, _ = get_fixture("logsumexp-std")
        u, d = rng.standard_normal(3), rng.standard_normal(3)
        assert directional_gradient(oracle, u, d, 0.3) == float(d @ oracle.gradient(u + 0.3 * d))


def test_counters_are_monotone(rng):
    oracle, _ = get_fixture("logsumexp-std")
    seen = [oracle.counters]
    for _ in range(5):
        u = rng.standard_normal(3)
        oracle.gradient(u)
        oracle.hessian(u)
        oracle.energy(u)
        seen.append(oracle.counters)
    for a, b in zip(seen, seen[1:]):
        assert b.energy_evals == a.energy_evals + 1
        assert b.gradient_evals == a.gradient_evals + 1
        assert b.hessian_evals == a.hessian_evals + 1


def test_oracle_rejects_bad_points():
    oracle = make_quadratic(np.eye(2))
    with pytest.raises(InvalidInputError):
        oracle.gradient([1.0])
    with pytest.raises(InvalidInputError):
        oracle.hessian([1.0, np.inf])


def test_returned_arrays_are_read_only():
    oracle = make_quadratic(np.eye(2))
    g = oracle.gradient([1.0, 2.0])
    with pytest.raises(ValueError):
        g[0] = 5.0


@pytest.mark.parametrize("name", ["quadratic-random", "logsumexp-std", "logsumexp-10", "cubic-0.1"])
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_finite_difference_checks(name, seed):
    oracle, x0 = get_fixture(name)
    rng = np.random.default_rng(seed)
    u = x0 + rng.uniform(-1.0, 1.0, x0.size)
    assert gradient_check_error(oracle, u) <= 1e-5
    assert hessian_check_error(oracle, u) <= 1e-4


def test_fd_hessian_detects_a_wrong_hessian():
    class Wrong(type(make_quadratic(np.eye(2)))):
        def _hessian(self, u):
            return 2.0 * self.A

    oracle = Wrong(np.diag([1.0, 3.0]))
    u = np.array([0.3, -0.2])
    assert not np.allclose(fd_hessian(oracle, u), oracle.hessian(u))
    assert hessian_check_error(oracle, u) > 1e-4
