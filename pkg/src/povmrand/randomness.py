"""Guessing probability and min-entropy of measurement outcomes.

An eavesdropper who knows the decomposition ``rho = sum_i w_i rho_i`` of the
measured state guesses the most likely outcome for each component. The
guessing probability is the best such average, an SDP whose dual is
``min tr(X rho)`` over ``X >= M_j``. Every report here carries both a
decomposition (primal) and an operator ``X`` (dual), so the value is
bracketed by numbers anyone can recompute.

Solvers:

* closed forms for qubit projective, trine and unbiased MIC measurements;
* a simplex-constrained fidelity maximisation for any unbiased extremal
  rank-one POVM;
* the square-root decomposition ``w_j rho_j = sqrt(rho) N_j sqrt(rho)`` with
  the matching dual ``c * rho^{-1/2}``, exact when ``tr(sqrt(rho) N_j)`` is
  the same for every ``j``;
* a linear program over a sphere grid of pure states, used as an
  independent lower-bound oracle for qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional, Sequence, Union

import numpy as np

from . import frankwolfe, linalg, simplex
from .blochgeo import (
    Face,
    Region,
    barycentric,
    classify_region,
    contraction,
    is_trine,
    mic_faces,
    require_qubit_mic,
    trine_face,
)
from .errors import (
    CertificationError,
    GridError,
    InputError,
    NotStateError,
    PreconditionError,
)
from .povm import (
    PAULIS,
    Povm,
    bloch_projector,
    bloch_vectors,
    make_projective_qubit,
    make_trine,
    rank_one_vectors,
    validate,
)
from .sphere import fibonacci_sphere

PURE_TOL = 1e-9
FEASIBILITY_TOL = 1e-10
CERT_PSD_TOL = 1e-9
CERT_RECON_TOL = 1e-9
CERT_GAP_TOL = 1e-7
# Below this contraction the state is pure within PURE_TOL and the face
# operators (which scale like 1/k) lose all precision to rounding.
FORMULA_MIN_SCALE = 1e-6

State = Union[np.ndarray, Sequence[float]]


@dataclass(frozen=True)
class GuessReport:
    """Result of a guessing-probability computation.

    ``primal`` is the value achieved by ``decomposition`` (each component
    paired with its most likely outcome) and ``dual`` is ``tr(X rho)`` for
    the ``certificate`` X; ``gap = dual - primal``.
    """

    pguess: float
    hmin_bits: float
    method: str
    decomposition: tuple[tuple[float, np.ndarray], ...]
    certificate: Optional[np.ndarray]
    primal: float
    dual: float
    gap: float
    region: Optional[Region] = None
    extras: dict[str, Any] = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict[str, Any]:
        from .povm import matrix_to_json

        return {
            "pguess": self.pguess,
            "hmin_bits": self.hmin_bits,
            "method": self.method,
            "primal": self.primal,
            "dual": self.dual,
            "gap": self.gap,
            "region": self.region.as_dict() if self.region is not None else None,
            "decomposition": [
                {"weight": w, "state": matrix_to_json(s)} for w, s in self.decomposition
            ],
            "certificate": matrix_to_json(self.certificate) if self.certificate is not None else None,
        }


def hmin(pguess: float) -> float:
    """Min-entropy ``-log2(pguess)`` in bits."""
    if not (pguess > 0.0) or not math.isfinite(pguess):
        raise InputError(f"guessing probability must be positive, got {pguess}")
    return -math.log2(pguess)


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def as_qubit_state(state: State) -> tuple[np.ndarray, np.ndarray]:
    """Accept a Bloch vector or a 2x2 density matrix; return ``(rho, r)``."""
    arr = np.asarray(state)
    if arr.shape == (3,):
        r = arr.astype(float)
        if np.linalg.norm(r) > 1.0 + 1e-10:
            raise NotStateError(f"|r| = {np.linalg.norm(r)!r} exceeds 1")
        return bloch_projector(r), r
    rho = linalg.check_state(arr)
    if rho.shape != (2, 2):
        raise NotStateError("expected a qubit state")
    return rho, np.array([np.trace(rho @ s).real for s in PAULIS])


def bloch_operator(scale: float, v: np.ndarray) -> np.ndarray:
    """``scale * (1 - v.sigma)``."""
    return scale * (np.eye(2) - sum(c * s for c, s in zip(v, PAULIS)))


def primal_value(decomposition: Sequence[tuple[float, np.ndarray]], p: Povm) -> float:
    """Average over components of the best single-outcome probability."""
    return float(sum(w * p.probabilities(s).max() for w, s in decomposition))


def min_slack(x: np.ndarray, p: Povm) -> float:
    """Smallest eigenvalue of ``X - M_j`` over all outcomes."""
    return min(float(linalg.eigvalsh(x - m)[0]) for m in p.elements)


def _is_pure(rho: np.ndarray, tol: float = PURE_TOL) -> bool:
    return float(linalg.eigvalsh(rho)[-1]) >= 1.0 - tol


def pure_state_certificate(rho: np.ndarray, p: Povm, slack: float = 0.0) -> np.ndarray:
    """Dual operator for (nearly) pure ``rho = |phi><phi|``.

    In a basis starting with ``phi`` the operator is
    ``[[v + slack, b^+], [b, K 1]]`` where ``v`` is the best outcome
    probability, ``b`` averages the off-diagonal blocks of the best elements
    and ``K`` is large enough to dominate every other element. With a unique
    best outcome ``slack = 0`` already gives a feasible, tight operator; ties
    need ``slack > 0``.
    """
    return _pure_certificate(_pure_parts(rho, p), slack)


def _pure_parts(rho: np.ndarray, p: Povm) -> tuple:
    """Slack-independent pieces of the pure-state certificate."""
    d = p.dim
    _, vecs = linalg.eig_hermitian(rho)
    basis = vecs[:, ::-1]  # phi first
    rot = np.einsum("ai,jab,bk->jik", basis.conj(), p.elements, basis)
    probs = rot[:, 0, 0].real
    v = float(probs.max())
    # Centring b on all (near-)tied outcomes keeps K, and the rounding it
    # amplifies, as small as possible.
    tied = np.flatnonzero(probs >= v - 1e-12)
    b_best = rot[tied, 1:, 0].mean(axis=0)
    tops = np.array([float(linalg.eigvalsh(rot[j, 1:, 1:])[-1]) if d > 1 else 0.0 for j in range(p.n)])
    diffs = b_best[None, :] - rot[:, 1:, 0]
    dns = np.einsum("ja,ja->j", diffs.conj(), diffs).real
    return basis, probs, v, b_best, tops, dns


def _pure_certificate(parts: tuple, slack: float) -> np.ndarray:
    basis, probs, v, b_best, tops, dns = parts
    d = basis.shape[0]
    pivots = v + slack - probs
    if np.any((dns > 0.0) & (pivots <= 0.0)):
        return np.full((d, d), np.inf)
    extra = np.divide(dns, pivots, out=np.zeros_like(dns), where=dns > 0.0)
    k = 2.0 * max(0.0, float(np.max(tops + extra))) + 1e-12
    xr = np.zeros((d, d), dtype=complex)
    xr[0, 0] = v + slack
    xr[1:, 0] = b_best
    xr[0, 1:] = b_best.conj()
    xr[1:, 1:] = k * np.eye(d - 1)
    return basis @ xr @ basis.conj().T


def _pure_candidates(rho: np.ndarray, p: Povm) -> list[np.ndarray]:
    parts = _pure_parts(rho, p)
    out = []
    for slack in (0.0, *(10.0 ** (-e / 4.0) for e in range(40, 27, -1))):
        x = _pure_certificate(parts, slack)
        if np.all(np.isfinite(x)):
            out.append(x)
    return out


def _best_certificate(
    candidates: Sequence[np.ndarray], rho: np.ndarray, p: Povm, floor: float = -math.inf
) -> tuple[np.ndarray, float]:
    """Feasible candidate with the smallest ``tr(X rho)``.

    Infeasible candidates are skipped, and so are those whose value falls
    below ``floor`` (a known primal value): no feasible operator can, so
    such a candidate only passed the eigenvalue test through rounding.
    """
    scored = []
    for x in candidates:
        if not np.all(np.isfinite(x)):
            continue
        x = 0.5 * (x + x.conj().T)
        scored.append((float(np.trace(x @ rho).real), x))
    if not scored:
        raise CertificationError("no finite dual candidate")
    # Cheapest first: the first feasible one at or above the floor is the answer.
    scored.sort(key=lambda vx: vx[0])
    slacks = []
    for val, x in scored:
        if val < floor - 1e-12:
            slacks.append(None)
            continue
        slack = min_slack(x, p)
        if slack >= -FEASIBILITY_TOL:
            return x, val
        slacks.append(slack)
    fallback = max(
        range(len(scored)),
        key=lambda i: slacks[i] if slacks[i] is not None else min_slack(scored[i][1], p),
    )
    return scored[fallback][1], scored[fallback][0]


def _report(
    value: float,
    rho: np.ndarray,
    p: Povm,
    decomposition: list[tuple[float, np.ndarray]],
    candidates: Sequence[np.ndarray],
    method: str,
    region: Optional[Region] = None,
    extras: Optional[dict[str, Any]] = None,
) -> GuessReport:
    decomposition = [(float(w), s) for w, s in decomposition if w > 0.0]
    cands = list(candidates)
    if _is_pure(rho):
        cands += _pure_candidates(rho, p)
    primal = primal_value(decomposition, p)
    x, dual = _best_certificate(cands, rho, p, floor=primal)
    return GuessReport(
        pguess=float(value),
        hmin_bits=hmin(value),
        method=method,
        decomposition=tuple(decomposition),
        certificate=x,
        primal=primal,
        dual=dual,
        # Rounding can leave the bracket inverted by an ulp; larger inversions are kept visible.
        gap=max(dual - primal, 0.0) if dual - primal >= -1e-12 else dual - primal,
        region=region,
        extras=dict(extras or {}),
    )


# ---------------------------------------------------------------------------
# Pure states
# ---------------------------------------------------------------------------


def pguess_pure(rho: State, p: Povm) -> GuessReport:
    """A pure state admits only the trivial decomposition: ``max_j tr(rho M_j)``."""
    m = np.asarray(rho)
    if m.shape == (3,) and p.dim == 2:
        m = as_qubit_state(m)[0]
    m = linalg.check_state(m)
    if m.shape[0] != p.dim:
        raise InputError("state and POVM dimensions differ")
    if not _is_pure(m):
        raise PreconditionError("state is not pure")
    value = float(p.probabilities(m).max())
    return _report(value, m, p, [(1.0, m)], [], "pure-state")


# ---------------------------------------------------------------------------
# Closed forms on a face
# ---------------------------------------------------------------------------


def inside_delta_value(p: float, l: float, n_outcomes: int) -> float:
    """``(1 + p l + sqrt(1-p^2) sqrt(1-l^2)) / n``."""
    return (1.0 + p * l + math.sqrt(max(0.0, 1.0 - p * p)) * math.sqrt(1.0 - l * l)) / n_outcomes


def outside_delta_value(p: float, q: float, l: float, m: float, n_outcomes: int) -> float:
    """``(1 + l p + m q + sqrt(1-p^2-q^2) sqrt(1-l^2-m^2)) / n``."""
    return (
        1.0
        + l * p
        + m * q
        + math.sqrt(max(0.0, 1.0 - p * p - q * q)) * math.sqrt(max(0.0, 1.0 - l * l - m * m))
    ) / n_outcomes


def _deficit(r: np.ndarray) -> float:
    """``1 - |r|^2``, zero for Bloch vectors that are unit up to rounding."""
    d = 1.0 - float(r @ r)
    return 0.0 if abs(d) <= 1e-12 else max(d, 0.0)


def _clean_weights(w: np.ndarray) -> np.ndarray:
    w = np.where(w < 0.0, 0.0, w)
    return w / w.sum()


def _face_solution(
    r: np.ndarray, vectors: np.ndarray, face: Face, region: Region, n_out: int
) -> tuple[float, list[tuple[float, np.ndarray]], list[np.ndarray]]:
    n, l = face.normal, face.l
    p = region.p
    if region.kind == "inside_delta":
        # 1 - p^2 = (1 - |r|^2) + |r_perp|^2 keeps full precision near the sphere.
        perp = r - p * n
        k = math.sqrt((_deficit(r) + float(perp @ perp)) / (1.0 - l * l))
        value = (1.0 + p * l + k * (1.0 - l * l)) / n_out
        if k <= FORMULA_MIN_SCALE:
            return value, [(1.0, bloch_projector(r))], []
        verts = vectors[list(face.vertices)]
        w, _ = barycentric(verts, (r - (p - k * l) * n) / k)
        w = _clean_weights(w)
        states = [(p - k * l) * n + k * rv for rv in verts]
        decomp = [(float(wi), bloch_projector(s)) for wi, s in zip(w, states)]
        x = bloch_operator((1.0 + 1.0 / k) / n_out, ((p - k * l) / (1.0 + k)) * n)
        return value, decomp, [x]
    # outside_delta
    assert region.edge is not None and region.omega is not None
    i, j = region.edge
    q, m, om = region.q, region.m, region.omega
    perp = r - p * n - q * om
    f = math.sqrt((_deficit(r) + float(perp @ perp)) / (1.0 - l * l - m * m))
    value = (1.0 + l * p + m * q + f * (1.0 - l * l - m * m)) / n_out
    if f <= FORMULA_MIN_SCALE:
        return value, [(1.0, bloch_projector(r))], []
    base = (p - f * l) * n + (q - f * m) * om
    e = vectors[i] - vectors[j]
    diff = 2.0 * float((r - p * n - q * om) @ e) / (f * float(e @ e))
    wi = min(1.0, max(0.0, 0.5 * (1.0 + diff)))
    decomp = [
        (wi, bloch_projector(base + f * vectors[i])),
        (1.0 - wi, bloch_projector(base + f * vectors[j])),
    ]
    x = bloch_operator((1.0 + 1.0 / f) / n_out, base / (1.0 + f))
    return value, decomp, [x]


def _inside_p_solution(r: np.ndarray, vectors: np.ndarray, p: Povm) -> tuple[float, list, list]:
    w, _ = barycentric(vectors, r)
    w = _clean_weights(w)
    value = p.dim / p.n
    decomp = [(float(wi), bloch_projector(v)) for wi, v in zip(w, vectors)]
    return value, decomp, [value * np.eye(2, dtype=complex)]


def pguess_projective_qubit(r: State, axis: Sequence[float]) -> GuessReport:
    """Projective measurement along ``axis`` on a qubit with Bloch vector ``r``.

    With ``p`` the length of the component of ``r`` orthogonal to the axis,
    the value is ``(1 + sqrt(1 - p^2))/2``.
    """
    rho, v = as_qubit_state(r)
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    povm = make_projective_qubit(a)
    along = float(v @ a)
    perp = v - along * a
    p = float(np.linalg.norm(perp))
    if p > 1e-15:
        n = perp / p
    else:
        helper = np.eye(3)[int(np.argmin(np.abs(a)))]
        n = np.cross(a, helper)
        n /= np.linalg.norm(n)
    k = math.sqrt(_deficit(v) + along * along)
    value = 0.5 * (1.0 + k)
    cands: list[np.ndarray] = []
    if k > FORMULA_MIN_SCALE:
        w1 = min(1.0, max(0.0, 0.5 * (1.0 + along / k)))
        decomp = [
            (w1, bloch_projector(k * a + p * n)),
            (1.0 - w1, bloch_projector(-k * a + p * n)),
        ]
        cands.append(bloch_operator(0.5 * (1.0 + 1.0 / k), (p / (1.0 + k)) * n))
    else:
        decomp = [(1.0, rho)]
    return _report(value, rho, povm, decomp, cands, "closed-form", extras={"p": p})


def pguess_trine(r: State, p: Optional[Povm] = None) -> GuessReport:
    """Closed form for the trine (three unbiased outcomes at 120 degrees)."""
    povm = p if p is not None else make_trine()
    if not is_trine(povm):
        raise PreconditionError("expected a trine POVM")
    rho, v = as_qubit_state(r)
    vecs = bloch_vectors(povm)
    region = classify_region(v, povm)
    if region.kind == "inside_P":
        value, decomp, cands = _inside_p_solution(v, vecs, povm)
    else:
        face = trine_face(vecs, v)
        value, decomp, cands = _face_solution(v, vecs, face, region, 3)
    return _report(value, rho, povm, decomp, cands, "closed-form", region)


def pguess_qubit_mic(r: State, p: Povm) -> GuessReport:
    """Closed form for an unbiased qubit MIC, by region of the Bloch ball."""
    rho, v = as_qubit_state(r)
    vecs, faces = mic_faces(p)
    region = classify_region(v, p)
    if region.kind == "inside_P":
        value, decomp, cands = _inside_p_solution(v, vecs, p)
    else:
        face = next(f for f in faces if f.vertices == region.face)
        value, decomp, cands = _face_solution(v, vecs, face, region, 4)
    return _report(value, rho, p, decomp, cands, "closed-form", region)


@dataclass(frozen=True)
class MaxRandomness:
    pguess: float
    hmin_bits: float
    optimal_states: tuple[np.ndarray, ...]
    povm: Povm = field(repr=False, compare=False)

    @cached_property
    def report(self) -> GuessReport:
        """Certified report for the first optimal state (computed on first use)."""
        return guessing_probability(self.optimal_states[0], self.povm)


def max_randomness(p: Povm) -> MaxRandomness:
    """Smallest guessing probability over all states, for qubit projective,
    trine and unbiased MIC measurements, with the optimal pure states."""
    if p.dim != 2:
        raise PreconditionError("closed-form maximal randomness is for qubit measurements")
    vecs = bloch_vectors(p)
    rep = validate(p)
    if not (rep.unbiased and rep.extremal_rank_one):
        raise PreconditionError("expected an unbiased extremal rank-one qubit POVM")
    if p.n == 2:
        a = vecs[0]
        helper = np.eye(3)[int(np.argmin(np.abs(a)))]
        e1 = np.cross(a, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(a, e1)
        states: tuple[np.ndarray, ...] = (e1, e2, -e1, -e2)
        value = 0.5
    elif p.n == 3:
        n = np.cross(vecs[1] - vecs[0], vecs[2] - vecs[0])
        n /= np.linalg.norm(n)
        states = (n, -n)
        value = 1.0 / 3.0
    elif p.n == 4:
        _, faces = mic_faces(p)
        states = tuple(f.normal for f in faces)
        value = 0.25 * (1.0 + faces[0].l)
    else:
        raise PreconditionError(f"no closed form for {p.n} outcomes")
    return MaxRandomness(value, hmin(value), states, p)


# ---------------------------------------------------------------------------
# General unbiased extremal rank-one POVMs
# ---------------------------------------------------------------------------


def _support(rho: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    w, v = linalg.eig_hermitian(rho)
    keep = w > tol
    return np.clip(w[keep], 0.0, None), v[:, keep]


def _geometric_operator(
    rho_w: np.ndarray, rho_v: np.ndarray, psi: np.ndarray, q: np.ndarray
) -> Optional[np.ndarray]:
    """``T = sqrt(rho) (sqrt(rho) sigma sqrt(rho))^{-1/2} sqrt(rho)`` on the support of rho.

    ``T sigma T = rho`` for ``sigma = sum_j q_j |psi_j><psi_j|``; returns
    None when the compressed ``sigma`` is singular.
    """
    sr = np.sqrt(rho_w)
    u = (rho_v.conj().T @ psi.T) * sr[:, None]  # columns sqrt(rho_s) V^+ psi_j
    a = (u * q) @ u.conj().T
    w, v = linalg.eig_hermitian(a)
    if w[0] <= 1e-14 * max(w[-1], 1e-300):
        return None
    inner = (v / np.sqrt(w)) @ v.conj().T
    t_s = sr[:, None] * inner * sr[None, :]
    return rho_v @ t_s @ rho_v.conj().T


def _kernel_extensions(
    block: np.ndarray, rho_v: np.ndarray, psi: np.ndarray, q: np.ndarray, d: int, n: int
) -> list[np.ndarray]:
    """Lift a support-only dual ``block`` to the full space.

    In a basis (support, kernel) the operator is ``[[block + s, b], [b^+, K 1]]``.
    The slack ``s`` is all that ``tr(X rho)`` pays; ``K`` is the Schur-complement
    bound that makes every ``X - M_j`` PSD and grows like ``1/s``.
    """
    r = rho_v.shape[1]
    kern = linalg.eig_hermitian(np.eye(d) - rho_v @ rho_v.conj().T)[1][:, r:]
    basis = np.hstack([rho_v, kern])
    coords = basis.conj().T @ psi.T  # column j holds psi_j in the new basis
    els = (d / n) * np.einsum("aj,bj->jab", coords, coords.conj())
    b = np.tensordot(q, els[:, :r, r:], axes=1)
    out = []
    for slack in (10.0 ** (-e / 4.0) for e in range(40, 27, -1)):
        top = 0.0
        for m in els:
            diff = b - m[:r, r:]
            schur = block + slack * np.eye(r) - m[:r, :r]
            w, v = linalg.eig_hermitian(schur)
            if w[0] <= 0.0:
                top = math.inf
                break
            y = v.conj().T @ diff
            need = m[r:, r:] + (y.conj().T / w) @ y
            top = max(top, float(linalg.eigvalsh(need)[-1]))
        if not math.isfinite(top):
            continue
        xr = np.zeros((d, d), dtype=complex)
        xr[:r, :r] = block + slack * np.eye(r)
        xr[:r, r:] = b
        xr[r:, :r] = b.conj().T
        xr[r:, r:] = (2.0 * top + 1e-12) * np.eye(d - r)
        out.append(basis @ xr @ basis.conj().T)
    return out


def _geometric_certificates(
    rho: np.ndarray, psi: np.ndarray, q: np.ndarray, d: int, n: int
) -> tuple[Optional[list[tuple[float, np.ndarray]]], list[np.ndarray]]:
    """Primal decomposition ``q_j T|psi_j><psi_j|T`` and dual ``c T^{-1}``."""
    ones = np.full(n, 1.0 / n)
    rho_w, rho_v = _support(rho)
    decomposition = None
    for eps in (0.0, 1e-12, 1e-9, 1e-6):
        qe = (1.0 - eps) * q + eps * ones
        t = _geometric_operator(rho_w, rho_v, psi, qe)
        if t is None:
            continue
        decomposition = []
        for j in range(n):
            if qe[j] <= 0.0:
                continue
            tv = t @ psi[j]
            w = float(qe[j] * np.vdot(tv, tv).real)
            if w > 0.0:
                decomposition.append((w, np.outer(tv, tv.conj()) * qe[j] / w))
        break

    duals: list[np.ndarray] = []
    full_rank = rho_w.size == d
    if not full_rank:
        for eps in (0.0, 1e-12, 1e-9):
            qe = (1.0 - eps) * q + eps * ones
            t = _geometric_operator(rho_w, rho_v, psi, qe)
            if t is None:
                continue
            c = (d / n) * max(float(np.vdot(pj, t @ pj).real) for pj in psi)
            block = c * linalg.inv_pd(rho_v.conj().T @ t @ rho_v)
            duals += _kernel_extensions(block, rho_v, psi, qe, d, n)
            break
    for eta in ((0.0,) if full_rank else ()) + (1e-12, 1e-10, 1e-8, 1e-6):
        reg = (1.0 - eta) * rho + eta * np.eye(d) / d
        rw, rv = _support(reg, tol=0.0)
        if rw.size < d or rw[0] <= 0.0:
            continue
        for eps in (0.0, 1e-12, 1e-9):
            qe = (1.0 - eps) * q + eps * ones
            t = _geometric_operator(rw, rv, psi, qe)
            if t is None:
                continue
            c = (d / n) * max(float(np.vdot(pj, t @ pj).real) for pj in psi)
            duals.append(c * linalg.inv_pd(t))
            break
    return decomposition, duals


def pguess_unbiased_general(
    rho: np.ndarray, p: Povm, tol: float = 1e-9, max_iter: int = 100_000
) -> GuessReport:
    """Guessing probability for any unbiased extremal rank-one POVM.

    The value is ``(d/n) max_q F(rho, sum_j q_j Pi_j)`` over probability
    vectors ``q``, where ``Pi_j`` are the normalised elements. The optimal
    ``sigma`` also yields the certificates: with ``T`` the positive solution
    of ``T sigma T = rho``, the components ``q_j T Pi_j T`` decompose
    ``rho`` and ``X = c T^{-1}`` is dual feasible for the right scale ``c``.
    """
    rho = linalg.check_state(rho)
    d, n = p.dim, p.n
    if rho.shape[0] != d:
        raise InputError("state and POVM dimensions differ")
    rep = validate(p)
    if not (rep.unbiased and rep.extremal_rank_one):
        raise PreconditionError("expected an unbiased extremal rank-one POVM")
    if _is_pure(rho):
        return pguess_pure(rho, p)
    _, psi = rank_one_vectors(p)
    rho_w, rho_v = _support(rho)
    u = (rho_v.conj().T @ psi.T) * np.sqrt(rho_w)[:, None]
    ops = (d / n) * np.einsum("aj,bj->jab", u, u.conj())
    res = frankwolfe.maximize(ops, tol=tol, max_iter=max_iter)
    value = res.value
    if value > d / n + 1e-9:
        raise CertificationError(f"value {value} exceeds d/n = {d / n}")
    if not value > 1.0 / (d * d):
        raise CertificationError(f"value {value} not above 1/d^2")
    decomposition, duals = _geometric_certificates(rho, psi, res.weights, d, n)
    if decomposition is None:
        decomposition = [(1.0, rho)]
    return _report(
        value,
        rho,
        p,
        decomposition,
        duals,
        "simplex-solver",
        extras={
            "weights": res.weights,
            "fw_gap": res.gap,
            "iterations": res.iterations,
            "converged": res.converged,
        },
    )


# ---------------------------------------------------------------------------
# Square-root decomposition (biased POVMs such as the skewed SIC)
# ---------------------------------------------------------------------------


def pguess_square_root(rho: np.ndarray, p: Povm) -> GuessReport:
    """Bounds from ``w_j rho_j = sqrt(rho) N_j sqrt(rho)`` and ``X = c rho^{-1/2}``.

    For rank-one elements ``c = max_j tr(sqrt(rho) N_j)`` makes ``X``
    feasible, and the bounds meet at ``(tr sqrt(rho))^2 / n`` exactly when all
    ``tr(sqrt(rho) N_j)`` coincide. The reported value is the primal one.
    """
    rho = linalg.check_state(rho)
    if rho.shape[0] != p.dim:
        raise InputError("state and POVM dimensions differ")
    sr = linalg.sqrt_psd(rho)
    decomp = []
    for m in p.elements:
        comp = sr @ m @ sr
        w = float(np.trace(comp).real)
        if w > 0.0:
            decomp.append((w, comp / w))
    overlaps = np.array([float(np.trace(sr @ m).real) for m in p.elements])
    cands: list[np.ndarray] = []
    if float(linalg.eigvalsh(rho)[0]) > 0.0:
        cands.append(float(overlaps.max()) * linalg.inv_sqrt_pd(rho))
    primal = primal_value(decomp, p)
    return _report(
        primal,
        rho,
        p,
        decomp,
        cands,
        "closed-form",
        extras={"sqrt_overlaps": overlaps, "trace_sqrt": float(np.trace(sr).real)},
    )


# ---------------------------------------------------------------------------
# Dispatcher
# ---------------------------------------------------------------------------


def guessing_probability(rho: State, p: Povm) -> GuessReport:
    """Pick the most specific solver that applies to ``(rho, p)``."""
    if p.dim == 2 and np.asarray(rho).shape == (3,):
        rho_m = as_qubit_state(rho)[0]
    else:
        rho_m = linalg.check_state(rho)
    if rho_m.shape[0] != p.dim:
        raise InputError("state and POVM dimensions differ")
    rep = validate(p)
    qubit_family = p.dim == 2 and rep.unbiased and rep.extremal_rank_one
    if qubit_family and p.n == 4:
        return pguess_qubit_mic(rho_m, p)
    if qubit_family and p.n == 3:
        return pguess_trine(rho_m, p)
    if qubit_family and p.n == 2:
        return pguess_projective_qubit(rho_m, bloch_vectors(p)[0])
    if _is_pure(rho_m):
        return pguess_pure(rho_m, p)
    if rep.unbiased and rep.extremal_rank_one:
        return pguess_unbiased_general(rho_m, p)
    return pguess_square_root(rho_m, p)


# ---------------------------------------------------------------------------
# Certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Certification:
    ok: bool
    min_slack: float
    reconstruction_error: float
    primal: float
    dual: float
    value_error: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "min_slack": self.min_slack,
            "reconstruction_error": self.reconstruction_error,
            "primal": self.primal,
            "dual": self.dual,
            "value_error": self.value_error,
        }


def certify(
    report: GuessReport,
    p: Povm,
    rho: State,
    psd_tol: float = CERT_PSD_TOL,
    recon_tol: float = CERT_RECON_TOL,
    gap_tol: float = CERT_GAP_TOL,
) -> Certification:
    """Recheck a report from scratch.

    Checks that every ``X - M_j`` is PSD, that the decomposition
    reassembles ``rho`` and that ``tr(X rho)`` matches the decomposition's
    value; the reported ``pguess`` must also sit inside that bracket.
    """
    rho_m = as_qubit_state(rho)[0] if np.asarray(rho).shape == (3,) else linalg.check_state(rho)
    if report.certificate is None:
        raise CertificationError("report carries no dual certificate")
    slack = min_slack(report.certificate, p)
    recon = sum(w * s for w, s in report.decomposition)
    recon_err = float(np.max(np.abs(recon - rho_m)))
    comp_ok = all(
        w >= 0.0 and linalg.psd_check(s, psd_tol)[0] and abs(np.trace(s).real - 1.0) <= recon_tol
        for w, s in report.decomposition
    )
    primal = primal_value(report.decomposition, p)
    dual = float(np.trace(report.certificate @ rho_m).real)
    value_err = abs(dual - primal)
    bracket_ok = primal - gap_tol <= report.pguess <= dual + gap_tol
    ok = slack >= -psd_tol and recon_err <= recon_tol and comp_ok and value_err <= gap_tol and bracket_ok
    return Certification(ok, slack, recon_err, primal, dual, value_err)


# ---------------------------------------------------------------------------
# Grid oracles (qubit)
# ---------------------------------------------------------------------------


def _affine_probabilities(p: Povm) -> tuple[np.ndarray, np.ndarray]:
    """``tr(M_j (1 + g.sigma)/2) = alpha_j + beta_j . g``."""
    alpha = np.array([np.trace(m).real / 2.0 for m in p.elements])
    beta = np.array([[np.trace(m @ s).real / 2.0 for s in PAULIS] for m in p.elements])
    return alpha, beta


@dataclass(frozen=True)
class OracleResult:
    value: float
    weights: np.ndarray
    points: np.ndarray
    pivots: int


def oracle_pguess_qubit(r: State, p: Povm, grid_size: int = 20_000) -> OracleResult:
    """Best decomposition of ``r`` into pure states of a Fibonacci grid.

    A linear program in the grid weights with four equality constraints
    (normalisation and the three Bloch components). The result never
    exceeds the true guessing probability.

    Raises:
        GridError: if ``r`` lies outside the convex hull of the grid.
    """
    if p.dim != 2:
        raise PreconditionError("grid oracle is for qubits")
    if grid_size < 1000:
        raise InputError("grid_size must be at least 1000")
    _, v = as_qubit_state(r)
    grid = fibonacci_sphere(grid_size)
    alpha, beta = _affine_probabilities(p)
    c = (alpha[None, :] + grid @ beta.T).max(axis=1)
    a = np.vstack([np.ones(grid_size), grid.T])
    b = np.concatenate([[1.0], v])
    try:
        res = simplex.solve(c, a, b)
    except simplex.Infeasible as exc:
        raise GridError(f"state outside the grid hull; refine the grid ({exc})") from exc
    support = np.flatnonzero(res.x > 0.0)
    return OracleResult(res.value, res.x[support], grid[support], res.pivots)


def oracle_max_randomness(p: Povm, n_points: int = 100_000, polish: bool = True) -> tuple[float, np.ndarray]:
    """Minimise ``max_j tr(M_j psi)`` over pure qubit states on a grid.

    The min-max is kinked at the optimum, so a grid alone is only accurate
    to about the grid spacing; with ``polish`` the best grid points seed a
    local epigraph solve on the sphere. Returns ``(value, bloch_vector)``.
    """
    from scipy.optimize import minimize

    alpha, beta = _affine_probabilities(p)
    grid = fibonacci_sphere(n_points)
    vals = (alpha[None, :] + grid @ beta.T).max(axis=1)
    order = np.argsort(vals)
    best_val = float(vals[order[0]])
    best_pt = grid[order[0]]
    if not polish:
        return best_val, best_pt

    def f(x: np.ndarray) -> float:
        u = x / np.linalg.norm(x)
        return float((alpha + beta @ u).max())

    for idx in order[:8]:
        x0 = np.append(grid[idx], vals[idx])
        cons = [
            {"type": "ineq", "fun": lambda z, j=j: z[3] - alpha[j] - beta[j] @ z[:3]}
            for j in range(p.n)
        ]
        cons.append({"type": "eq", "fun": lambda z: z[:3] @ z[:3] - 1.0})
        sol = minimize(lambda z: z[3], x0, constraints=cons, method="SLSQP", options={"ftol": 1e-15, "maxiter": 200})
        cand = f(sol.x[:3])
        if cand < best_val:
            best_val, best_pt = cand, sol.x[:3] / np.linalg.norm(sol.x[:3])
    return best_val, best_pt


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

CSV_HEADER = "family,params,state_spec,pguess,hmin,gap,region"


def csv_row(family: str, params: str, state_spec: str, report: GuessReport) -> str:
    region = report.region.label() if report.region is not None else ""
    return ",".join(
        [
            family,
            f'"{params}"' if "," in params else params,
            f'"{state_spec}"' if "," in state_spec else state_spec,
            f"{report.pguess:.12g}",
            f"{report.hmin_bits:.12g}",
            f"{report.gap:.12g}",
            region,
        ]
    )
