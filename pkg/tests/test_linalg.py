import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_state
from povmrand import linalg
from povmrand.errors import NotHermitianError, NotPsdError, NotStateError


def _herm(raw):
    d = int(round(np.sqrt(raw.size // 2)))
    m = raw[: d * d].reshape(d, d) + 1j * raw[d * d : 2 * d * d].reshape(d, d)
    return m + m.conj().T


matrices = st.integers(1, 4).flatmap(
    lambda d: arrays(np.float64, 2 * d * d, elements=st.floats(-5, 5))
).map(_herm)


@given(matrices)
def test_eig_matches_numpy(h):
    w, v = linalg.eig_hermitian(h)
    assert np.allclose(w, np.linalg.eigvalsh(h), atol=1e-12 * max(1.0, np.abs(h).max()))
    assert np.all(np.diff(w) >= 0)
    assert np.allclose(v.conj().T @ v, np.eye(h.shape[0]), atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-11 * max(1.0, np.abs(h).max()))


def test_relative_accuracy_on_graded_matrix():
    # The tiny eigenvalue of a graded PD matrix keeps its relative accuracy.
    h = np.array([[1.0, 1e-5, 0.0], [1e-5, 1e-8, 1e-13], [0.0, 1e-13, 1e-16]])
    w = linalg.eigvalsh(h)
    det = np.linalg.det(h)
    assert w[0] > 0
    assert abs(np.prod(w) - det) <= 1e-6 * abs(det)


@pytest.mark.parametrize("bad", [np.array([[1, 2], [0, 1]]), np.ones((2, 3))])
def test_non_hermitian_rejected(bad):
    with pytest.raises(NotHermitianError):
        linalg.hermitian(bad)


def test_hermitian_operator_is_read_only():
    op = linalg.HermitianOperator(np.array([[1, 1j], [-1j, 2]]))
    assert op.dim == 2
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 3


@given(st.integers(1, 4), st.integers(0, 2**31))
def test_sqrt_squares_back(d, seed):
    rho = random_state(d, np.random.default_rng(seed))
    s = linalg.sqrt_psd(rho)
    assert np.allclose(s @ s, rho, atol=1e-12)
    assert np.all(linalg.eigvalsh(s) >= -1e-12)


def test_sqrt_rejects_negative():
    with pytest.raises(NotPsdError) as err:
        linalg.sqrt_psd(np.diag([1.0, -1e-6]))
    assert err.value.min_eigenvalue == pytest.approx(-1e-6)


def test_sqrt_clamps_rounding_negatives():
    s = linalg.sqrt_psd(np.diag([1.0, -1e-12]))
    assert np.allclose(s, np.diag([1.0, 0.0]))


@given(st.integers(2, 4), st.integers(0, 2**31))
def test_fidelity_properties(d, seed):
    rng = np.random.default_rng(seed)
    a, b = random_state(d, rng), random_state(d, rng)
    f_ab, f_ba = linalg.fidelity(a, b), linalg.fidelity(b, a)
    assert 0.0 <= f_ab <= 1.0 + 1e-12
    assert f_ab == pytest.approx(f_ba, abs=1e-10)
    assert linalg.fidelity(a, a) == pytest.approx(1.0, abs=1e-10)


def test_fidelity_pure_states_is_overlap():
    psi = np.array([1, 1j]) / np.sqrt(2)
    phi = np.array([1, 0])
    assert linalg.fidelity(np.outer(psi, psi.conj()), np.outer(phi, phi)) == pytest.approx(0.5)


@pytest.mark.parametrize(
    "rho",
    [np.diag([0.5, 0.6]), np.diag([1.2, -0.2]), np.array([[0.5, 1], [0, 0.5]])],
)
def test_check_state_rejects(rho):
    with pytest.raises(NotStateError):
        linalg.check_state(rho)


def test_canonical_eigenbasis_degenerate_is_deterministic():
    rng = np.random.default_rng(7)
    u = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
    h = u @ np.diag([0.25, 0.25, 0.5]) @ u.conj().T
    w1, v1 = linalg.canonical_eigenbasis(h)
    w2, v2 = linalg.canonical_eigenbasis(h.copy())
    assert np.array_equal(v1, v2)
    assert np.allclose(v1 @ np.diag(w1) @ v1.conj().T, h, atol=1e-12)
    for k in range(3):
        col = v1[:, k]
        lead = col[np.argmax(np.abs(col) > 1e-8)]
        assert abs(lead.imag) < 1e-14 and lead.real > 0


def test_identity_canonical_basis_is_computational():
    _, v = linalg.canonical_eigenbasis(np.eye(3) / 3)
    assert np.allclose(v, np.eye(3))
