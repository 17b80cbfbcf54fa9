"""POVM containers, validation and the measurement families used throughout.

Families are built from closed-form vectors; every constructor returns a
:class:`Povm` whose elements are PSD and sum to the identity within 1e-10.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from . import linalg
from .errors import (
    DegeneratePovmError,
    InputError,
    NotInformationallyCompleteError,
    NotPovmError,
)

POVM_TOL = 1e-10
RANK_RTOL = 1e-8

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

SIC_DELTA = math.acos(1.0 / math.sqrt(3.0))
QUTRIT_SIC_DELTA = math.acos(math.sqrt(2.0 / 3.0))
QUTRIT_DELTA_MAX = math.acos(1.0 / math.sqrt(3.0))
QUQUART_SIC_A = math.sqrt(2.0 + math.sqrt(5.0))


def bloch_projector(r: Sequence[float]) -> np.ndarray:
    """``(1 + r.sigma)/2`` for a Bloch vector ``r``."""
    x, y, z = (float(c) for c in r)
    return 0.5 * (np.eye(2, dtype=complex) + x * PAULI_X + y * PAULI_Y + z * PAULI_Z)


@dataclass(frozen=True)
class Povm:
    """A finite POVM on a ``dim``-dimensional Hilbert space.

    ``elements`` is stored as a read-only ``(n, dim, dim)`` complex array.
    Construction checks shapes, Hermiticity, positivity and completeness.
    """

    dim: int
    elements: np.ndarray
    label: str = ""
    params: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        els = np.array(self.elements, dtype=complex)
        if els.ndim != 3 or els.shape[1:] != (self.dim, self.dim):
            raise NotPovmError(
                f"elements must have shape (n, {self.dim}, {self.dim}), got {els.shape}"
            )
        if els.shape[0] == 0:
            raise NotPovmError("a POVM needs at least one element")
        sym = np.empty_like(els)
        for j, m in enumerate(els):
            try:
                sym[j] = linalg.hermitian(m, tol=POVM_TOL)
            except InputError as exc:
                raise NotPovmError(f"element {j}: {exc}") from exc
            ok, lo = linalg.psd_check(sym[j], POVM_TOL)
            if not ok:
                raise NotPovmError(f"element {j} has eigenvalue {lo:.3e}")
        resid = float(np.linalg.norm(sym.sum(axis=0) - np.eye(self.dim)))
        if resid > POVM_TOL:
            raise NotPovmError(f"elements sum to identity only within {resid:.3e}")
        sym.setflags(write=False)
        object.__setattr__(self, "elements", sym)

    @property
    def n(self) -> int:
        return self.elements.shape[0]

    def __len__(self) -> int:
        return self.n

    def probabilities(self, rho: np.ndarray) -> np.ndarray:
        """Born-rule outcome probabilities ``tr(rho M_j)``."""
        return np.einsum("jab,ba->j", self.elements, np.asarray(rho, dtype=complex)).real

    def conjugated(self, unitary: np.ndarray, label: Optional[str] = None) -> "Povm":
        """The POVM ``{U M_j U^+}``."""
        u = np.asarray(unitary, dtype=complex)
        els = np.einsum("ab,jbc,dc->jad", u, self.elements, u.conj())
        return Povm(self.dim, els, label or self.label, dict(self.params))


@dataclass(frozen=True)
class PovmReport:
    valid: bool
    unbiased: bool
    informationally_complete: bool
    extremal_rank_one: bool
    is_sic: bool
    diagnostics: dict[str, float]

    def as_dict(self) -> dict[str, Any]:
        return {
            "valid": self.valid,
            "unbiased": self.unbiased,
            "informationally_complete": self.informationally_complete,
            "extremal_rank_one": self.extremal_rank_one,
            "is_sic": self.is_sic,
            "diagnostics": {k: (v if math.isfinite(v) else None) for k, v in self.diagnostics.items()},
        }


@functools.lru_cache(maxsize=None)
def _upper(d: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(d, 1)


def real_vectorize(m: np.ndarray) -> np.ndarray:
    """Map a Hermitian matrix to the real vector of its d^2 free parameters."""
    iu = _upper(m.shape[0])
    return np.concatenate(
        [np.diag(m).real, math.sqrt(2) * m[iu].real, math.sqrt(2) * m[iu].imag]
    )


def _spectral_rank(sv: np.ndarray, rtol: float = RANK_RTOL) -> int:
    top = float(sv.max()) if sv.size else 0.0
    if top == 0.0:
        return 0
    return int(np.sum(sv > rtol * top))


def numerical_rank(mat: np.ndarray, rtol: float = RANK_RTOL) -> int:
    return _spectral_rank(np.linalg.svd(mat, compute_uv=False), rtol)


def validate(p: Povm, tol: float = POVM_TOL) -> PovmReport:
    """Classify a POVM.

    Flags are computed independently; ``diagnostics`` carries the residuals
    behind each decision. The report at the default tolerance is cached on
    the (immutable) POVM.
    """
    if tol == POVM_TOL:
        cached = p.__dict__.get("_report")
        if cached is None:
            cached = _validate(p, tol)
            object.__setattr__(p, "_report", cached)
        return cached
    return _validate(p, tol)


def _validate(p: Povm, tol: float) -> PovmReport:
    d, n = p.dim, p.n
    els = p.elements
    spectra = [linalg.eigvalsh(m) for m in els]
    min_eigs = [float(w[0]) for w in spectra]
    completeness = float(np.linalg.norm(els.sum(axis=0) - np.eye(d)))
    valid = min(min_eigs) >= -tol and completeness <= tol

    traces = np.trace(els, axis1=1, axis2=2).real
    trace_spread = float(traces.max() - traces.min())
    unbiased = trace_spread <= tol

    frame = np.array([real_vectorize(m) for m in els])
    frame_rank = numerical_rank(frame)
    ic = frame_rank == d * d

    # singular values of a Hermitian matrix are its absolute eigenvalues
    element_ranks = [_spectral_rank(np.abs(w)) for w in spectra]
    rank_one = all(r == 1 for r in element_ranks)
    extremal = rank_one and frame_rank == n

    sic_residual = math.inf
    if n == d * d and unbiased and rank_one:
        proj = els * d
        gram = np.einsum("iab,jba->ij", proj, proj).real
        target = (d * np.eye(n) + 1.0) / (d + 1.0)
        sic_residual = float(np.max(np.abs(gram - target)))
    is_sic = sic_residual <= tol

    diagnostics = {
        "min_eigenvalue": min(min_eigs),
        "completeness_residual": completeness,
        "trace_spread": trace_spread,
        "frame_rank": float(frame_rank),
        "max_element_rank": float(max(element_ranks)),
        "sic_residual": sic_residual,
    }
    return PovmReport(valid, unbiased, ic, extremal, is_sic, diagnostics)


def check_sic(p: Povm, tol: float = POVM_TOL) -> bool:
    return validate(p, tol).is_sic


def rank_one_vectors(p: Povm) -> tuple[np.ndarray, np.ndarray]:
    """Split rank-one elements as ``M_j = w_j |psi_j><psi_j|``.

    Returns ``(weights, vectors)`` with unit vectors as rows.
    """
    weights = np.empty(p.n)
    vecs = np.empty((p.n, p.dim), dtype=complex)
    for j, m in enumerate(p.elements):
        w, v = linalg.eig_hermitian(m)
        if p.dim > 1 and w[-2] > RANK_RTOL * max(w[-1], 1e-300):
            raise InputError(f"element {j} is not rank one")
        weights[j] = w[-1]
        vecs[j] = v[:, -1]
    return weights, vecs


def bloch_vectors(p: Povm) -> np.ndarray:
    """Bloch vectors of the normalised elements of a qubit POVM."""
    if p.dim != 2:
        raise InputError("Bloch vectors need a qubit POVM")
    els = p.elements
    # M = (tr M / 2)(1 + r.sigma), read off entrywise
    tr = (els[:, 0, 0] + els[:, 1, 1]).real
    off = els[:, 0, 1] + els[:, 1, 0].conj()
    out = np.stack([off.real, -off.imag, (els[:, 0, 0] - els[:, 1, 1]).real], axis=1)
    return out / tr[:, None]


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


def make_projective(d: int, basis: Optional[np.ndarray] = None) -> Povm:
    """Projective measurement onto the columns of ``basis`` (default: computational)."""
    if d < 1:
        raise InputError("dimension must be positive")
    u = np.eye(d, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    if u.shape != (d, d):
        raise InputError(f"basis must be {d}x{d}")
    if np.linalg.norm(u.conj().T @ u - np.eye(d)) > POVM_TOL:
        raise InputError("basis is not unitary")
    els = np.array([np.outer(u[:, j], u[:, j].conj()) for j in range(d)])
    return Povm(d, els, "projective", {"d": d})


def make_projective_qubit(axis: Sequence[float]) -> Povm:
    """Two-outcome qubit projective measurement along a Bloch axis."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    els = np.array([bloch_projector(a), bloch_projector(-a)])
    return Povm(2, els, "projective", {"axis": a.tolist()})


def trine_vectors() -> np.ndarray:
    ang = 2.0 * math.pi * np.arange(3) / 3.0
    return np.stack([np.cos(ang), np.sin(ang), np.zeros(3)], axis=1)


def make_trine() -> Povm:
    """Three outcomes ``(2/3)|psi_j><psi_j|`` at 120 degrees in the x-y plane."""
    els = np.array([(2.0 / 3.0) * bloch_projector(r) for r in trine_vectors()])
    return Povm(2, els, "trine", {})


@dataclass(frozen=True)
class QubitMicAngles:
    """Angles of an unbiased qubit MIC, both in open intervals.

    ``delta`` lies in (0, pi/2) and ``alpha`` in (-pi/2, pi/2). The SIC sits
    at ``delta = arccos(1/sqrt(3))``, ``alpha = 0``.
    """

    delta: float
    alpha: float = 0.0

    def __post_init__(self) -> None:
        d, a = float(self.delta), float(self.alpha)
        if not (math.isfinite(d) and math.isfinite(a)):
            raise InputError("angles must be finite")
        if not (0.0 <= d <= math.pi / 2) or not (-math.pi / 2 <= a <= math.pi / 2):
            raise InputError(f"angles out of range: delta={d}, alpha={a}")
        if d in (0.0, math.pi / 2) or a in (-math.pi / 2, math.pi / 2):
            raise DegeneratePovmError(f"boundary angles give a degenerate MIC: delta={d}, alpha={a}")
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "alpha", a)

    @classmethod
    def sic(cls) -> "QubitMicAngles":
        return cls(SIC_DELTA, 0.0)


def qubit_mic_vectors(angles: QubitMicAngles) -> np.ndarray:
    cd, sd = math.cos(angles.delta), math.sin(angles.delta)
    ca, sa = math.cos(angles.alpha), math.sin(angles.alpha)
    return np.array(
        [
            [-cd, -sd, 0.0],
            [-cd, sd, 0.0],
            [cd, -sd * sa, sd * ca],
            [cd, sd * sa, -sd * ca],
        ]
    )


def _as_angles(delta: float | QubitMicAngles, alpha: float) -> QubitMicAngles:
    return delta if isinstance(delta, QubitMicAngles) else QubitMicAngles(delta, alpha)


def make_qubit_mic(delta: float | QubitMicAngles, alpha: float = 0.0) -> Povm:
    """Unbiased qubit MIC with elements ``(1 + r_j.sigma)/4``."""
    ang = _as_angles(delta, alpha)
    els = np.array([0.5 * bloch_projector(r) for r in qubit_mic_vectors(ang)])
    return Povm(2, els, "qubit-mic", {"delta": ang.delta, "alpha": ang.alpha})


def make_qubit_sic() -> Povm:
    p = make_qubit_mic(QubitMicAngles.sic())
    return Povm(2, p.elements, "sic", {"d": 2})


def make_group_covariant_qubit_mic(delta: float | QubitMicAngles, alpha: float = 0.0) -> Povm:
    """The same MIC built as an orbit of one fiducial under four unitaries."""
    ang = _as_angles(delta, alpha)
    half = ang.alpha / 2.0
    f = (math.cos(half) + math.sin(half)) / math.sqrt(2.0)
    g = (math.cos(half) - math.sin(half)) / math.sqrt(2.0)
    fiducial = np.array([1.0, -np.exp(1j * ang.delta)]) / math.sqrt(2.0)
    base = 0.5 * np.outer(fiducial, fiducial.conj())
    unitaries = (np.eye(2), PAULI_X, f * PAULI_Y - g * PAULI_Z, g * PAULI_Y + f * PAULI_Z)
    els = np.array([u @ base @ u.conj().T for u in unitaries])
    return Povm(2, els, "group-covariant-mic", {"delta": ang.delta, "alpha": ang.alpha})


# --- qutrit -------------------------------------------------------------


def weyl_heisenberg_d3(j: int, k: int) -> np.ndarray:
    """Displacement ``e^{i pi j k/3} sum_m eta^{j m} |k+m><m|`` with ``eta = e^{2 pi i/3}``."""
    eta = np.exp(2j * math.pi / 3.0)
    out = np.zeros((3, 3), dtype=complex)
    for m in range(3):
        out[(k + m) % 3, m] = eta ** (j * m)
    return np.exp(1j * math.pi * j * k / 3.0) * out


def qutrit_fiducial(delta: float) -> np.ndarray:
    c, s = math.cos(delta), math.sin(delta)
    u = 2.0 * c + math.sqrt(2.0) * s
    w = 2.0 * c - 2.0 * math.sqrt(2.0) * s
    return np.array([u, u, w], dtype=complex) / (2.0 * math.sqrt(3.0))


def make_qutrit_scissors(delta: float) -> Povm:
    """Nine-outcome Weyl-Heisenberg covariant qutrit MIC.

    Elements are ``D_jk |psi><psi| D_jk^+ / 3`` in lexicographic ``(j, k)``
    order. ``cos(delta) = sqrt(2/3)`` gives a SIC.

    Raises:
        NotInformationallyCompleteError: if some displacement overlap
            ``<psi|D_jk|psi>`` vanishes (including ``delta = 0`` and the upper
            end ``arccos(1/sqrt(3))``).
    """
    delta = float(delta)
    if not (0.0 <= delta <= QUTRIT_DELTA_MAX + 1e-15):
        raise InputError(f"delta must lie in (0, arccos(1/sqrt(3))], got {delta}")
    psi = qutrit_fiducial(delta)
    els = []
    for j in range(3):
        for k in range(3):
            dk = weyl_heisenberg_d3(j, k)
            if abs(psi.conj() @ dk @ psi) < 1e-12:
                raise NotInformationallyCompleteError(
                    f"overlap with D_{j}{k} vanishes at delta={delta}"
                )
            v = dk @ psi
            els.append(np.outer(v, v.conj()) / 3.0)
    return Povm(3, np.array(els), "qutrit-scissors", {"delta": delta})


# --- ququart ------------------------------------------------------------


def ququart_vectors(a: float) -> np.ndarray:
    i = 1j
    raw = [
        (a, 1, 1, 1),
        (a, -1, 1, -1),
        (a, 1, -1, -1),
        (a, -1, -1, 1),
        (1, i * a, -i, 1),
        (1, -i * a, -i, -1),
        (1, i * a, i, -1),
        (1, -i * a, i, 1),
        (1, 1, -i * a, i),
        (1, -1, -i * a, -i),
        (1, 1, i * a, -i),
        (1, -1, i * a, i),
        (1, i, 1, -i * a),
        (1, -i, 1, i * a),
        (1, i, -1, i * a),
        (1, -i, -1, -i * a),
    ]
    return np.array(raw, dtype=complex) / math.sqrt(3.0 + a * a)


def make_ququart_scissors(a: float) -> Povm:
    """Sixteen-outcome ququart MIC; ``a = sqrt(2 + sqrt(5))`` gives a SIC."""
    a = float(a)
    if not math.isfinite(a) or a <= 1.0:
        raise DegeneratePovmError(f"ququart family needs a > 1, got {a}")
    els = np.array([np.outer(v, v.conj()) / 4.0 for v in ququart_vectors(a)])
    return Povm(4, els, "ququart-scissors", {"a": a})


def make_sic(d: int) -> Povm:
    """Reference SIC in dimension 2, 3 or 4."""
    if d == 2:
        return make_qubit_sic()
    if d == 3:
        base = make_qutrit_scissors(QUTRIT_SIC_DELTA)
    elif d == 4:
        base = make_ququart_scissors(QUQUART_SIC_A)
    else:
        raise InputError(f"no reference SIC for d={d}")
    return Povm(d, base.elements, "sic", {"d": d})


# --- skewed SIC ---------------------------------------------------------


@dataclass(frozen=True)
class SkewedSicParams:
    """``gamma`` in (0, 1) and the (0-based) index of the singled-out element."""

    d: int
    gamma: float
    singled: int = 0

    def __post_init__(self) -> None:
        if self.d not in (2, 3, 4):
            raise InputError(f"skewed SIC needs d in {{2, 3, 4}}, got {self.d}")
        if not (0.0 < self.gamma < 1.0):
            raise InputError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not (0 <= self.singled < self.d * self.d):
            raise InputError(f"singled index {self.singled} out of range")


def make_skewed_sic(params: SkewedSicParams, base: Optional[Povm] = None) -> Povm:
    """Reweight a SIC so one element carries weight ``gamma`` and renormalise.

    With ``A_1 = gamma Pi_1`` and ``A_j = (1-gamma)/(d-1) Pi_j`` the elements
    are ``Omega^{-1/2} A_j Omega^{-1/2}`` for ``Omega = sum_j A_j``. Omega
    only has two distinct eigenvalues, so its inverse square root is
    ``(1 - G) Pi_1 + G * 1`` with ``G = sqrt((d-1) / (d (1-gamma)))``.
    """
    d, g = params.d, params.gamma
    sic = base if base is not None else make_sic(d)
    if sic.dim != d or sic.n != d * d:
        raise InputError("base must be a SIC of matching dimension")
    proj = sic.elements * d
    k = params.singled
    big_g = math.sqrt((d - 1) / (d * (1.0 - g)))
    inv_sqrt = (1.0 - big_g) * proj[k] + big_g * np.eye(d)
    els = []
    for j in range(d * d):
        weight = g if j == k else (1.0 - g) / (d - 1)
        els.append(inv_sqrt @ (weight * proj[j]) @ inv_sqrt)
    return Povm(d, np.array(els), "skewed-sic", {"d": d, "gamma": g, "singled": k})


def isotropic_state(projector: np.ndarray, eps: float) -> np.ndarray:
    """``(1 - eps) P + eps * 1/d``."""
    d = projector.shape[0]
    return (1.0 - eps) * projector + eps * np.eye(d) / d


def gamma_for_noisy_state(d: int, eps: float) -> float:
    """Skew parameter at which the square-root decomposition of the noisy
    fiducial state is optimal:
    ``(1 + (d-1) sqrt(eps / (d - eps (d-1)))) / d^2``."""
    if d < 2:
        raise InputError("d must be at least 2")
    if not (0.0 <= eps <= 1.0):
        raise InputError(f"eps must lie in [0, 1], got {eps}")
    return (1.0 + (d - 1) * math.sqrt(eps / (d - eps * (d - 1)))) / (d * d)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def format_float(x: float) -> str:
    """17 significant digits; bit-exact on read-back."""
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f"cannot serialise non-finite value {x}")
    s = format(x, ".17g")
    return s if any(ch in s for ch in ".en") else s + ".0"


def dumps_canonical(obj: Any, indent: int = 0, _level: int = 0) -> str:
    """Deterministic JSON with 17-digit floats and insertion-ordered keys."""
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    pad = "\n" + " " * (indent * (_level + 1)) if indent else ""
    end = "\n" + " " * (indent * _level) if indent else ""
    sep = "," + pad if indent else ", "
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{dumps_canonical(str(k))}: {dumps_canonical(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + pad + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        # Keep leaf lists (numbers) on one line.
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps_canonical(v) for v in seq) + "]"
        return "[" + pad + sep.join(dumps_canonical(v, indent, _level + 1) for v in seq) + end + "]"
    raise InputError(f"cannot serialise {type(obj).__name__}")


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def matrix_from_json(rows: Any) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"matrix must be d x d of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def povm_to_dict(p: Povm) -> dict[str, Any]:
    return {
        "dim": p.dim,
        "n": p.n,
        "label": p.label,
        "elements": [matrix_to_json(m) for m in p.elements],
    }


def povm_to_json(p: Povm) -> str:
    return dumps_canonical(povm_to_dict(p), indent=1) + "\n"


def _check_json_elements(data: dict[str, Any], tol: float) -> tuple[int, np.ndarray]:
    try:
        dim = int(data["dim"])
        n = int(data["n"])
        raw = data["elements"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"missing or malformed field: {exc}") from exc
    els = np.array([matrix_from_json(m) for m in raw]) if raw else np.zeros((0, dim, dim))
    if els.shape != (n, dim, dim):
        raise InputError(f"elements shape {els.shape} does not match n={n}, dim={dim}")
    for j, m in enumerate(els):
        skew = float(np.max(np.abs(m - m.conj().T)))
        if skew > tol:
            raise InputError(f"element {j} is not Hermitian (skew {skew:.3e})")
    return dim, 0.5 * (els + els.conj().transpose(0, 2, 1))


def povm_from_dict(data: dict[str, Any], tol: float = 1e-8) -> Povm:
    dim, els = _check_json_elements(data, tol)
    resid = float(np.linalg.norm(els.sum(axis=0) - np.eye(dim)))
    if resid > tol:
        raise InputError(f"elements do not sum to identity (residual {resid:.3e})")
    for j, m in enumerate(els):
        ok, lo = linalg.psd_check(m, tol)
        if not ok:
            raise InputError(f"element {j} has eigenvalue {lo:.3e}")
        if lo < -POVM_TOL:
            w, v = linalg.eig_hermitian(m)
            els[j] = (v * np.clip(w, 0.0, None)) @ v.conj().T
    if np.linalg.norm(els.sum(axis=0) - np.eye(dim)) > POVM_TOL:
        # Absorb a tolerated completeness error so the container invariant holds.
        fix = linalg.inv_sqrt_pd(els.sum(axis=0))
        els = np.array([fix @ m @ fix for m in els])
    return Povm(dim, els, str(data.get("label", "")))


def povm_from_json(text: str, tol: float = 1e-8) -> Povm:
    import json

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("POVM JSON must be an object")
    return povm_from_dict(data, tol)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def element_projectors(p: Povm) -> Iterable[np.ndarray]:
    for m in p.elements:
        yield m / np.trace(m).real
