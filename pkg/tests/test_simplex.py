import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from povmrand import simplex
from povmrand.errors import InputError


def test_textbook_lp():
    # max 3x + 2y  s.t.  x + y + s1 = 4, x + 3y + s2 = 6
    c = np.array([3.0, 2.0, 0.0, 0.0])
    a = np.array([[1.0, 1.0, 1.0, 0.0], [1.0, 3.0, 0.0, 1.0]])
    res = simplex.solve(c, a, np.array([4.0, 6.0]))
    assert res.value == pytest.approx(12.0)
    assert np.allclose(res.x, [4.0, 0.0, 0.0, 2.0])


def test_infeasible():
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(simplex.Infeasible):
        simplex.solve(np.ones(2), a, np.array([1.0, 2.0]))


def test_unbounded():
    a = np.array([[1.0, -1.0]])
    with pytest.raises(simplex.Unbounded):
        simplex.solve(np.array([0.0, 1.0]), a, np.array([1.0]))


def test_dimension_mismatch():
    with pytest.raises(InputError):
        simplex.solve(np.ones(3), np.ones((2, 2)), np.ones(2))


def test_negative_rhs_is_normalised():
    a = np.array([[-1.0, -1.0]])
    res = simplex.solve(np.array([1.0, 2.0]), a, np.array([-1.0]))
    assert res.value == pytest.approx(2.0)


def test_degenerate_cycling_example():
    # Beale's example cycles under the textbook Dantzig rule without anti-cycling.
    c = np.array([0.75, -150.0, 0.02, -6.0, 0, 0, 0])
    a = np.array([
        [0.25, -60.0, -0.04, 9.0, 1, 0, 0],
        [0.5, -90.0, -0.02, 3.0, 0, 1, 0],
        [0.0, 0.0, 1.0, 0.0, 0, 0, 1],
    ])
    res = simplex.solve(c, a, np.array([0.0, 0.0, 1.0]))
    assert res.value == pytest.approx(0.05)


@given(st.integers(1, 4), st.integers(2, 12), st.integers(0, 2**31))
def test_matches_scipy(m, extra, seed):
    rng = np.random.default_rng(seed)
    n = m + extra
    a = rng.normal(size=(m, n))
    x0 = rng.uniform(0.0, 1.0, size=n)
    b = a @ x0
    # a row of all ones keeps the feasible set bounded
    a = np.vstack([a, np.ones(n)])
    b = np.append(b, x0.sum())
    c = rng.normal(size=n)
    ref = linprog(-c, A_eq=a, b_eq=b, bounds=[(0, None)] * n, method="highs")
    res = simplex.solve(c, a, b)
    assert res.value == pytest.approx(-ref.fun, abs=1e-8)
    assert np.all(res.x >= -1e-12)
    assert np.allclose(a @ res.x, b, atol=1e-8)
