"""Small dense Hermitian linear algebra.

Everything here works on ``d x d`` complex matrices with ``d`` in the low
single digits. The eigensolver is a cyclic two-sided Jacobi method; it is
deterministic and computes the small eigenvalues of well-graded positive
matrices to high relative accuracy, which is what the PSD checks on dual
certificates rely on.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ConvergenceError, NotHermitianError, NotPsdError, NotStateError

HERMITIAN_TOL = 1e-12
PSD_CLAMP = 1e-10
MAX_SWEEPS = 60

ArrayLike = Union[np.ndarray, "HermitianOperator", list]


@dataclass(frozen=True)
class HermitianOperator:
    """A validated Hermitian matrix.

    Construction rejects anything whose anti-Hermitian part exceeds
    ``HERMITIAN_TOL`` relative to the matrix scale, then stores the exactly
    symmetrised matrix.
    """

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise NotHermitianError(f"expected a square matrix, got shape {m.shape}")
        scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
        skew = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if skew > HERMITIAN_TOL * scale:
            raise NotHermitianError(f"matrix is not Hermitian (max |H - H^+| = {skew:.3e})")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def as_matrix(h: ArrayLike) -> np.ndarray:
    if isinstance(h, HermitianOperator):
        return h.matrix
    return np.asarray(h, dtype=complex)


def hermitian(h: ArrayLike, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``h`` as a symmetrised complex array, raising if it is not Hermitian."""
    if isinstance(h, HermitianOperator):
        return h.matrix
    m = np.array(h, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    skew = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if skew > tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian (max |H - H^+| = {skew:.3e})")
    return 0.5 * (m + m.conj().T)


def _jacobi(a: list[list[complex]], n: int) -> tuple[list[float], list[list[complex]]]:
    """Cyclic Jacobi on a row-major list copy; returns (diag, V) with V columns."""
    v = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]
    eps = 2.220446049250313e-16
    fro2 = sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n))
    tiny = 1e-300 + (eps * eps * 1e-4) * fro2
    for _ in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                mag = abs(apq)
                app = a[p][p].real
                aqq = a[q][q].real
                # Skip when the pair is already negligible on a relative scale.
                if mag * mag <= tiny or mag <= eps * math.sqrt(abs(app * aqq)):
                    continue
                rotated = True
                phase = apq / mag
                tau = (aqq - app) / (2.0 * mag)
                if tau >= 0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # U = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] acting on columns p, q.
                u_qp = -s * phase.conjugate()
                u_qq = c * phase.conjugate()
                for k in range(n):
                    akp = a[k][p]
                    akq = a[k][q]
                    a[k][p] = c * akp + u_qp * akq
                    a[k][q] = s * akp + u_qq * akq
                for k in range(n):
                    apk = a[p][k]
                    aqk = a[q][k]
                    a[p][k] = c * apk + u_qp.conjugate() * aqk
                    a[q][k] = s * apk + u_qq.conjugate() * aqk
                a[p][p] = complex(app - t * mag)
                a[q][q] = complex(aqq + t * mag)
                a[p][q] = 0j
                a[q][p] = 0j
                for k in range(n):
                    vkp = v[k][p]
                    vkq = v[k][q]
                    v[k][p] = c * vkp + u_qp * vkq
                    v[k][q] = s * vkp + u_qq * vkq
        if not rotated:
            return [a[i][i].real for i in range(n)], v
    off = math.sqrt(sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j))
    raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps", off)


def eig_hermitian(h: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian matrix.

    Returns ``(w, v)`` with ``w`` ascending and the columns of ``v`` the
    matching orthonormal eigenvectors, so ``v @ diag(w) @ v^+`` reproduces
    ``h``.

    Raises:
        ConvergenceError: carrying the off-diagonal residual if the sweeps
            do not converge.
    """
    m = hermitian(h)
    n = m.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=complex)
    rows = [[complex(x) for x in row] for row in m]
    diag, vecs = _jacobi(rows, n)
    w = np.array(diag)
    v = np.array(vecs, dtype=complex)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigvalsh(h: ArrayLike) -> np.ndarray:
    return eig_hermitian(h)[0]


def spectral_apply(h: ArrayLike, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a real function to the spectrum of ``h``."""
    w, v = eig_hermitian(h)
    return (v * fn(w)) @ v.conj().T


def psd_check(h: ArrayLike, tol: float = PSD_CLAMP) -> tuple[bool, float]:
    """Return ``(min_eig >= -tol, min_eig)``."""
    w = eigvalsh(h)
    lo = float(w[0]) if w.size else 0.0
    return lo >= -tol, lo


def _clamped_spectrum(h: ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    w, v = eig_hermitian(h)
    if w.size and w[0] < -PSD_CLAMP:
        raise NotPsdError(f"matrix has eigenvalue {w[0]:.3e} < -{PSD_CLAMP:g}", float(w[0]))
    return np.clip(w, 0.0, None), v


def sqrt_psd(h: ArrayLike) -> np.ndarray:
    """Principal square root of a positive semidefinite matrix.

    Eigenvalues in ``(-1e-10, 0)`` are treated as zero; anything more
    negative raises :class:`NotPsdError`.
    """
    w, v = _clamped_spectrum(h)
    return (v * np.sqrt(w)) @ v.conj().T


def inv_sqrt_pd(h: ArrayLike, floor: float = 0.0) -> np.ndarray:
    """Inverse square root of a positive definite matrix."""
    w, v = _clamped_spectrum(h)
    if w[0] <= floor:
        raise NotPsdError("matrix is singular; inverse square root undefined", float(w[0]))
    return (v / np.sqrt(w)) @ v.conj().T


def inv_pd(h: ArrayLike) -> np.ndarray:
    w, v = _clamped_spectrum(h)
    if w[0] <= 0.0:
        raise NotPsdError("matrix is singular", float(w[0]))
    return (v / w) @ v.conj().T


def trace_sqrt(h: ArrayLike) -> float:
    """``tr sqrt(h)`` for PSD ``h``."""
    w, _ = _clamped_spectrum(h)
    return float(np.sum(np.sqrt(w)))


def check_state(rho: ArrayLike, tol: float = 1e-9, *, subnormalized: bool = False) -> np.ndarray:
    """Validate a density operator and return it as a symmetrised array."""
    try:
        m = hermitian(rho)
    except NotHermitianError as exc:
        raise NotStateError(str(exc)) from exc
    ok, lo = psd_check(m, tol)
    if not ok:
        raise NotStateError(f"state has negative eigenvalue {lo:.3e}")
    tr = float(np.trace(m).real)
    if subnormalized:
        if tr > 1.0 + tol:
            raise NotStateError(f"trace {tr!r} exceeds 1")
    elif abs(tr - 1.0) > tol:
        raise NotStateError(f"trace {tr!r} differs from 1")
    return m


def fidelity(rho: ArrayLike, sigma: ArrayLike) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    Inputs may be subnormalised (trace at most ``1 + 1e-9``).
    """
    r = check_state(rho, subnormalized=True)
    s = check_state(sigma, subnormalized=True)
    sr = sqrt_psd(r)
    inner = sr @ s @ sr
    return trace_sqrt(0.5 * (inner + inner.conj().T)) ** 2


def projector(vec: np.ndarray) -> np.ndarray:
    """Rank-one projector onto the (normalised) vector ``vec``."""
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def canonical_eigenbasis(h: ArrayLike, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Eigenbasis with a deterministic choice inside degenerate eigenspaces.

    Each cluster of eigenvalues closer than ``tol`` is re-spanned by
    Gram-Schmidt on the projections of the computational basis vectors, in
    order. Every column is then phased so its first significant entry is
    real and positive.
    """
    w, v = eig_hermitian(h)
    n = w.size
    out = np.zeros_like(v)
    i = 0
    while i < n:
        j = i + 1
        while j < n and w[j] - w[j - 1] <= tol:
            j += 1
        block = v[:, i:j]
        proj = block @ block.conj().T
        basis: list[np.ndarray] = []
        for k in range(n):
            cand = proj[:, k].copy()
            for b in basis:
                cand -= b * (b.conj() @ cand)
            norm = np.linalg.norm(cand)
            if norm > 1e-6:
                basis.append(cand / norm)
            if len(basis) == j - i:
                break
        out[:, i:j] = np.array(basis).T
        i = j
    for k in range(n):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col) > 1e-8))
        out[:, k] = col * cmath.exp(-1j * cmath.phase(col[idx]))
    return w, out
