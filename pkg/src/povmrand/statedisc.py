"""Minimum-error discrimination of balanced ensembles.

A state ``rho`` measured with an unbiased rank-one POVM ``{M_j}`` induces the
ensemble ``nu_j = sqrt(rho) M_j^* sqrt(rho)`` (complex conjugation taken in
the eigenbasis of ``rho``). Its optimal discrimination probability equals the
guessing probability of the measurement outcomes, and both are the same
fidelity maximisation over the simplex.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np

from . import frankwolfe, linalg
from .errors import InputError, PreconditionError
from .povm import (
    Povm,
    dumps_canonical,
    matrix_from_json,
    matrix_to_json,
    real_vectorize,
    validate,
)

ENSEMBLE_TOL = 1e-10
BALANCE_TOL = 1e-9
COEFF_TOL = -1e-10
LSTSQ_RESIDUAL = 1e-9
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class Ensemble:
    """Subnormalised states ``nu_j`` whose traces are the prior weights."""

    states: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        st = np.array(self.states, dtype=complex)
        if st.ndim != 3 or st.shape[1] != st.shape[2] or st.shape[0] == 0:
            raise InputError(f"ensemble states must be an (n, d, d) stack, got {st.shape}")
        st = 0.5 * (st + st.conj().transpose(0, 2, 1))
        for j, s in enumerate(st):
            ok, lo = linalg.psd_check(s, ENSEMBLE_TOL)
            if not ok:
                raise InputError(f"state {j} has eigenvalue {lo:.3e}")
        total = float(np.trace(st.sum(axis=0)).real)
        if abs(total - 1.0) > ENSEMBLE_TOL:
            raise InputError(f"weights sum to {total!r}, not 1")
        st.setflags(write=False)
        object.__setattr__(self, "states", st)

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def nu(self) -> np.ndarray:
        return self.states.sum(axis=0)

    @property
    def weights(self) -> np.ndarray:
        return np.trace(self.states, axis1=1, axis2=2).real

    @property
    def rank(self) -> int:
        w = linalg.eigvalsh(self.nu)
        return int(np.sum(w > SUPPORT_TOL * max(w[-1], 1e-300)))


def _support_inverse(nu: np.ndarray) -> np.ndarray:
    """Inverse of ``nu`` on its support (pseudo-inverse)."""
    w, v = linalg.eig_hermitian(nu)
    keep = w > SUPPORT_TOL * max(w[-1], 1e-300)
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    return (v * inv) @ v.conj().T


def overlaps(e: Ensemble) -> np.ndarray:
    """``tr(nu^{-1} nu_j)`` for every ``j``."""
    inv = _support_inverse(e.nu)
    return np.einsum("ab,jba->j", inv, e.states).real


def is_balanced(e: Ensemble, tol: float = BALANCE_TOL) -> bool:
    """True when every overlap ``tr(nu^{-1} nu_j)`` equals ``rank/n``."""
    return bool(np.max(np.abs(overlaps(e) - e.rank / e.n)) <= tol)


def _conjugate_in_basis(m: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Complex conjugate of ``m`` taken in the orthonormal ``basis`` (columns)."""
    return basis @ (basis.conj().T @ m @ basis).conj() @ basis.conj().T


def ensemble_from_state_and_povm(rho: np.ndarray, p: Povm) -> Ensemble:
    """``nu_j = sqrt(rho) M_j^* sqrt(rho)``, conjugating in rho's canonical eigenbasis."""
    rho = linalg.check_state(rho)
    if rho.shape[0] != p.dim:
        raise InputError("state and POVM dimensions differ")
    rep = validate(p)
    if not (rep.unbiased and rep.extremal_rank_one):
        raise PreconditionError("expected an unbiased extremal rank-one POVM")
    _, basis = linalg.canonical_eigenbasis(rho)
    sr = linalg.sqrt_psd(rho)
    states = np.array([sr @ _conjugate_in_basis(m, basis) @ sr for m in p.elements])
    return Ensemble(states, label=f"induced:{p.label}")


def povm_from_ensemble(e: Ensemble) -> Povm:
    """Inverse map ``M_j = nu^{-1/2} nu_j^* nu^{-1/2}`` for a full-rank ``nu``."""
    if e.rank != e.dim:
        raise PreconditionError("nu must be full rank to recover a POVM")
    _, basis = linalg.canonical_eigenbasis(e.nu)
    isr = linalg.inv_sqrt_pd(e.nu)
    return Povm(e.dim, np.array([isr @ _conjugate_in_basis(s, basis) @ isr for s in e.states]))


@dataclass(frozen=True)
class DiscriminationResult:
    pguess: float
    weights: np.ndarray
    gap: float
    iterations: int


def pguess_discrimination(e: Ensemble, tol: float = 1e-9) -> DiscriminationResult:
    """``max_q (tr sqrt(sum_j q_j nu_j))^2`` over probability vectors ``q``.

    Valid for balanced, linearly independent ensembles.
    """
    if not is_balanced(e):
        raise PreconditionError("ensemble overlaps tr(nu^-1 nu_j) are not all equal to d/n")
    frame = np.array([real_vectorize(s) for s in e.states])
    if np.linalg.matrix_rank(frame, tol=1e-10 * max(np.abs(frame).max(), 1e-300)) < e.n:
        raise PreconditionError("ensemble states are linearly dependent")
    res = frankwolfe.maximize(e.states, tol=tol)
    return DiscriminationResult(res.value, res.weights, res.gap, res.iterations)


@dataclass(frozen=True)
class MaxConfidence:
    """The condition holds: ``K_j = c_j nu^{-1} nu_j nu^{-1}`` is optimal with value ``rank/n``."""

    povm: Povm
    coefficients: np.ndarray
    pguess: float
    dual: np.ndarray
    success: float


@dataclass(frozen=True)
class ConditionFails:
    """Some coefficient of ``nu^2 = sum_j c_j nu_j`` is negative (or no exact solution)."""

    coefficients: np.ndarray
    residual: float
    pguess: float
    extras: dict[str, Any] = field(default_factory=dict)


def square_coefficients(e: Ensemble) -> tuple[np.ndarray, float]:
    """Least-squares ``c`` with ``nu^2 = sum_j c_j nu_j``; returns ``(c, residual)``."""
    frame = np.array([real_vectorize(s) for s in e.states]).T
    if np.linalg.matrix_rank(frame, tol=1e-10 * max(np.abs(frame).max(), 1e-300)) < e.n:
        raise InputError("ensemble states are linearly dependent")
    nu = e.nu
    target = real_vectorize(nu @ nu)
    c, *_ = np.linalg.lstsq(frame, target, rcond=None)
    return c, float(np.linalg.norm(frame @ c - target))


def max_confidence_povm(e: Ensemble) -> Union[MaxConfidence, ConditionFails]:
    """Maximum-confidence measurement when ``nu^2`` is a nonnegative mix of the ``nu_j``."""
    c, residual = square_coefficients(e)
    if residual > LSTSQ_RESIDUAL or np.any(c < COEFF_TOL):
        value = pguess_discrimination(e).pguess if is_balanced(e) else float("nan")
        return ConditionFails(c, residual, value)
    if e.rank != e.dim:
        raise PreconditionError("nu must be full rank for the maximum-confidence measurement")
    inv = linalg.inv_pd(e.nu)
    cc = np.clip(c, 0.0, None)
    elements = np.array([cj * inv @ s @ inv for cj, s in zip(cc, e.states)])
    povm = Povm(e.dim, elements, "max-confidence")
    success = float(sum(np.trace(k @ s).real for k, s in zip(elements, e.states)))
    dual = (e.rank / e.n) * e.nu
    return MaxConfidence(povm, c, e.rank / e.n, dual, success)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def ensemble_to_dict(e: Ensemble) -> dict[str, Any]:
    return {
        "dim": e.dim,
        "n": e.n,
        "label": e.label,
        "weights": [float(w) for w in e.weights],
        "elements": [matrix_to_json(s) for s in e.states],
    }


def ensemble_to_json(e: Ensemble) -> str:
    return dumps_canonical(ensemble_to_dict(e), indent=1) + "\n"


def ensemble_from_dict(data: dict[str, Any]) -> Ensemble:
    try:
        dim, n, raw = int(data["dim"]), int(data["n"]), data["elements"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"missing or malformed field: {exc}") from exc
    states = np.array([matrix_from_json(m) for m in raw])
    if states.shape != (n, dim, dim):
        raise InputError(f"elements shape {states.shape} does not match n={n}, dim={dim}")
    e = Ensemble(states, str(data.get("label", "")))
    weights: Optional[list] = data.get("weights")
    if weights is not None and np.max(np.abs(np.asarray(weights, dtype=float) - e.weights)) > 1e-9:
        raise InputError("weights field disagrees with the traces of the states")
    return e


def ensemble_from_json(text: str) -> Ensemble:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("ensemble JSON must be an object")
    return ensemble_from_dict(data)
