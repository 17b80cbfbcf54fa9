import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state
from povmrand import frankwolfe as fw
from povmrand import sphere


def _pure(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def test_orthogonal_projectors_value():
    # (tr sqrt(sum q_j P_j))^2 with orthogonal rank-one P_j is (sum sqrt q_j)^2, max d at uniform
    ops = np.array([np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0]), np.diag([0, 0, 1.0])])
    res = fw.maximize(ops, tol=1e-12)
    assert res.value == pytest.approx(3.0, abs=1e-12)
    assert np.allclose(res.weights, 1 / 3)


def test_identical_operators():
    ops = np.array([_pure([1, 0]), _pure([1, 0])])
    res = fw.maximize(ops)
    assert res.value == pytest.approx(1.0)
    assert res.gap <= 1e-9


def test_two_pure_states_closed_form():
    # For two pure states the optimum is 1 + sqrt(1 - |<a|b>|^2) at equal weights.
    a, b = np.array([1, 0]), np.array([math.cos(0.4), math.sin(0.4)])
    res = fw.maximize(np.array([_pure(a), _pure(b)]), tol=1e-12)
    assert res.value == pytest.approx(1 + math.sqrt(1 - abs(np.vdot(a, b)) ** 2), abs=1e-10)
    assert np.allclose(res.weights, 0.5, atol=1e-6)


@given(st.integers(2, 4), st.integers(2, 6), st.integers(0, 2**31))
def test_gap_certifies_optimality(d, n, seed):
    rng = np.random.default_rng(seed)
    ops = np.array([random_state(d, rng, rank=1) for _ in range(n)])
    res = fw.maximize(ops, tol=1e-9)
    assert res.converged and res.gap <= 1e-9
    assert res.weights.sum() == pytest.approx(1.0)
    assert np.all(res.weights >= 0)
    lo, hi = fw.bound_from_gap(res)
    # no random point of the simplex beats the upper bound
    for _ in range(50):
        q = rng.dirichlet(np.ones(n))
        assert fw.objective(ops, q) <= hi + 1e-12
    assert lo == res.value


@given(st.integers(2, 4), st.integers(2, 5), st.integers(0, 2**31))
def test_gradient_euler_identity(d, n, seed):
    rng = np.random.default_rng(seed)
    ops = np.array([random_state(d, rng) for _ in range(n)])
    q = rng.dirichlet(np.ones(n))
    value, g = fw.gradient(ops, q)
    assert value == pytest.approx(fw.objective(ops, q), rel=1e-12)
    assert q @ g == pytest.approx(value, rel=1e-10)
    # finite-difference check along a simplex direction
    e = np.zeros(n)
    e[0], e[1] = 1.0, -1.0
    h = 1e-6 * min(q[1], 1.0)
    fd = (fw.objective(ops, q + h * e) - fw.objective(ops, q - h * e)) / (2 * h)
    assert fd == pytest.approx(g[0] - g[1], abs=1e-5)


def test_iteration_budget_reported():
    rng = np.random.default_rng(0)
    ops = np.array([random_state(3, rng, rank=1) for _ in range(9)])
    res = fw.maximize(ops, tol=0.0, max_iter=3)
    assert res.iterations == 3 and not res.converged


@pytest.mark.parametrize("n", [1, 2, 50, 1001])
def test_fibonacci_sphere(n):
    pts = sphere.fibonacci_sphere(n)
    assert pts.shape == (n, 3)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)


def test_fibonacci_sphere_is_balanced():
    pts = sphere.fibonacci_sphere(4000)
    assert np.linalg.norm(pts.mean(axis=0)) < 1e-3
    with pytest.raises(ValueError):
        sphere.fibonacci_sphere(0)
