"""Bloch-ball geometry of qubit measurements.

For an unbiased qubit MIC the four Bloch vectors span a tetrahedron
(a disphenoid: opposite edges have equal length). This module computes its
face normals, the Gram matrix of the elements and its inverse, the dual
frame, the ellipsoid of post-measurement Bloch vectors, and the region of
the Bloch ball a given state falls into.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import InputError, PreconditionError
from .povm import PAULIS, Povm, QubitMicAngles, bloch_projector, bloch_vectors, validate

FACES: tuple[tuple[int, int, int], ...] = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
BLOCH_TOL = 1e-10
REGION_TOL = 1e-9


def to_bloch(rho: np.ndarray) -> np.ndarray:
    """Bloch vector ``(tr(rho X), tr(rho Y), tr(rho Z))`` of a qubit state."""
    m = np.asarray(rho, dtype=complex)
    if m.shape != (2, 2):
        raise InputError("Bloch vectors are defined for qubits only")
    r = np.array([np.trace(m @ s).real for s in PAULIS])
    if np.linalg.norm(r) > 1.0 + BLOCH_TOL:
        raise InputError(f"|r| = {np.linalg.norm(r)!r} exceeds 1")
    return r


def from_bloch(r: Sequence[float]) -> np.ndarray:
    v = np.asarray(r, dtype=float)
    if v.shape != (3,):
        raise InputError("Bloch vector must have three components")
    if np.linalg.norm(v) > 1.0 + BLOCH_TOL:
        raise InputError(f"|r| = {np.linalg.norm(v)!r} exceeds 1")
    return bloch_projector(v)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / math.sqrt(float(v @ v))


@dataclass(frozen=True)
class Edge:
    """Edge ``(i, j)`` of a face, opposite face vertex ``k``.

    ``omega`` is the in-face unit vector perpendicular to the edge pointing
    away from ``k``; ``m = r_i . omega`` is the edge's offset along it.
    """

    i: int
    j: int
    k: int
    omega: np.ndarray
    m: float


@dataclass(frozen=True)
class Face:
    """A face of the measurement polytope with outward unit normal.

    ``l = r_i . normal`` is the same for every vertex of the face.
    """

    vertices: tuple[int, ...]
    normal: np.ndarray
    l: float
    edges: tuple[Edge, ...]


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # np.cross carries axis-handling overhead that dominates for single 3-vectors
    return np.array([u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]])


def _make_face(vectors: np.ndarray, verts: tuple[int, ...], normal: np.ndarray) -> Face:
    # plain floats: numpy call overhead dominates for 3-vectors
    vs = vectors.tolist()
    n = _unit(normal).tolist()
    dot = lambda u, v: u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
    l = sum(dot(vs[v], n) for v in verts) / len(verts)
    if l < 0:
        n, l = [-x for x in n], -l
    edges = []
    for a in range(len(verts)):
        for b in range(a + 1, len(verts)):
            i, j = verts[a], verts[b]
            k = next(v for v in verts if v not in (i, j))
            e = [vs[j][0] - vs[i][0], vs[j][1] - vs[i][1], vs[j][2] - vs[i][2]]
            w = [e[1] * n[2] - e[2] * n[1], e[2] * n[0] - e[0] * n[2], e[0] * n[1] - e[1] * n[0]]
            norm = math.sqrt(dot(w, w))
            w = [x / norm for x in w]
            if dot(w, vs[k]) - dot(w, vs[i]) > 0:
                w = [-x for x in w]
            edges.append(Edge(i, j, k, np.array(w), dot(vs[i], w)))
    return Face(verts, np.array(n), l, tuple(edges))


@dataclass(frozen=True)
class MicGeometry:
    """Geometric data of an unbiased qubit MIC.

    ``a, b, c`` are the overlaps ``r1.r2``, ``r1.r3``, ``r2.r3`` (opposite
    edges agree, so these three determine the tetrahedron).
    """

    vectors: np.ndarray
    a: float
    b: float
    c: float
    area_sq: float
    area_sq_from_overlaps: float
    l: float
    t: float
    faces: tuple[Face, ...]
    gram: np.ndarray
    gram_inv: np.ndarray
    gram_inv_closed_form: np.ndarray
    dual_vectors: np.ndarray
    ellipsoid: np.ndarray
    ellipsoid_eigenvalues: np.ndarray
    ellipsoid_volume: float
    extras: dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def normals(self) -> dict[str, np.ndarray]:
        return {"".join(str(v + 1) for v in f.vertices): f.normal for f in self.faces}

    def as_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "A2": self.area_sq,
            "l": self.l,
            "t": self.t,
            "volume": self.ellipsoid_volume,
            "ellipsoid_eigenvalues": [float(x) for x in self.ellipsoid_eigenvalues],
            "normals": {k: [float(x) for x in v] for k, v in self.normals.items()},
            "dual_vectors": [[float(x) for x in f] for f in self.dual_vectors],
        }


def require_qubit_mic(p: Povm) -> np.ndarray:
    """Return the Bloch vectors of ``p`` or raise if it is not an unbiased qubit MIC."""
    if p.dim != 2 or p.n != 4:
        raise PreconditionError("expected a four-outcome qubit POVM")
    rep = validate(p)
    if not (rep.unbiased and rep.extremal_rank_one and rep.informationally_complete):
        raise PreconditionError("expected an unbiased rank-one qubit MIC")
    return bloch_vectors(p)


def overlap_matrix(a: float, b: float, c: float) -> np.ndarray:
    """``r_i . r_j`` for a disphenoid with overlaps (a, b, c)."""
    return np.array([[1, a, b, c], [a, 1, c, b], [b, c, 1, a], [c, b, a, 1]], dtype=float)


def gram_inverse_closed_form(a: float, b: float, c: float) -> np.ndarray:
    """``(J + (4/t) M) / 8`` with ``M`` built from the squared face area."""
    area_sq = 1 + a * b + a * c + b * c
    t = (1 + a) * (1 + b) * (1 + c)
    ea = area_sq - 2 * (1 - a * a)
    eb = area_sq - 2 * (1 - b * b)
    ec = area_sq - 2 * (1 - c * c)
    m = 0.5 * np.array(
        [
            [area_sq, ea, eb, ec],
            [ea, area_sq, ec, eb],
            [eb, ec, area_sq, ea],
            [ec, eb, ea, area_sq],
        ]
    )
    return (np.ones((4, 4)) + (4.0 / t) * m) / 8.0


def mic_geometry(p: Povm) -> MicGeometry:
    r = require_qubit_mic(p)
    a, b, c = float(r[0] @ r[1]), float(r[0] @ r[2]), float(r[1] @ r[2])
    area_sq = float(np.linalg.norm(_cross(r[0] - r[2], r[1] - r[2])) ** 2 / 4.0)
    area_sq_ov = 1 + a * b + a * c + b * c
    area = math.sqrt(area_sq)
    t = (1 + a) * (1 + b) * (1 + c)
    l_triple = abs(float(r[0] @ _cross(r[1], r[2]))) / (2.0 * area)

    faces = _faces(r)

    gram = 0.5 * (1.0 + r @ r.T)
    gram_inv = np.linalg.inv(gram)
    gram_inv_cf = gram_inverse_closed_form(a, b, c)
    dual = 2.0 * gram_inv @ r

    # Ellipsoid R^T N R = 1 of post-measurement Bloch vectors of pure inputs,
    # assembled from the Gram inverse and the dual frame.
    mmat = (t / 4.0) * (8.0 * gram_inv - np.ones((4, 4)))
    ell = np.einsum("kl,ka,lb->ab", mmat, dual, dual) / (4.0 * t)
    ell = 0.5 * (ell + ell.T)
    eig = np.linalg.eigvalsh(ell)
    volume = (4.0 * math.pi / 3.0) / math.sqrt(float(np.prod(eig)))

    extras = {
        "l_from_triple_product": l_triple,
        "l_from_t": math.sqrt(t / (2.0 * area_sq_ov)),
        "volume_from_t": math.pi * t / 6.0,
    }
    return MicGeometry(
        vectors=r,
        a=a,
        b=b,
        c=c,
        area_sq=area_sq,
        area_sq_from_overlaps=area_sq_ov,
        l=faces[0].l,
        t=t,
        faces=faces,
        gram=gram,
        gram_inv=gram_inv,
        gram_inv_closed_form=gram_inv_cf,
        dual_vectors=dual,
        ellipsoid=ell,
        ellipsoid_eigenvalues=eig,
        ellipsoid_volume=volume,
        extras=extras,
    )


def ellipsoid_eigen_closed_form(a: float, b: float, c: float) -> tuple[np.ndarray, tuple[tuple[int, int], ...]]:
    """Eigenvalues ``4/(1+x)^2`` and the vertex pairs whose sums are eigenvectors."""
    vals = np.array([4.0 / (1 + a) ** 2, 4.0 / (1 + b) ** 2, 4.0 / (1 + c) ** 2])
    return vals, ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class ParamGeometry:
    area_sq: float
    l: float
    t: float
    volume: float


def parameterized_geometry(delta: float | QubitMicAngles, alpha: float = 0.0) -> ParamGeometry:
    """Closed-form ``A^2``, ``l``, ``t`` and ellipsoid volume in terms of the angles."""
    ang = delta if isinstance(delta, QubitMicAngles) else QubitMicAngles(delta, alpha)
    cd, sd, ca = math.cos(ang.delta), math.sin(ang.delta), math.cos(ang.alpha)
    area_sq = sd * sd * (4 * cd * cd + sd * sd * ca * ca)
    l_sq = cd * cd * sd**4 * ca * ca / area_sq
    t = 2.0 * cd * cd * sd**4 * ca * ca
    return ParamGeometry(area_sq, math.sqrt(l_sq), t, math.pi / 3.0 * cd * cd * sd**4 * ca * ca)


def post_measurement_state(rho: np.ndarray, p: Povm) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(R, probs)`` with ``R = sum_j p_j r_j``.

    The probabilities are recovered from ``R`` through the dual frame,
    ``p_j = (1 + f_j . R)/4``.
    """
    geo = mic_geometry(p)
    probs = p.probabilities(np.asarray(rho, dtype=complex))
    big_r = probs @ geo.vectors
    return big_r, 0.25 * (1.0 + geo.dual_vectors @ big_r)


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """Where a Bloch vector sits relative to a measurement's polytope.

    ``kind`` is ``"inside_P"`` (convex hull of the measurement vectors),
    ``"inside_delta"`` (the contracted copy of the dominant face at the
    state's height) or ``"outside_delta"`` (past one of its edges).
    """

    kind: str
    face: Optional[tuple[int, ...]] = None
    edge: Optional[tuple[int, int]] = None
    p: float = 0.0
    q: float = 0.0
    m: float = 0.0
    l: float = 0.0
    k: float = 0.0
    normal: Optional[np.ndarray] = None
    omega: Optional[np.ndarray] = None

    def as_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.face is not None:
            out["face"] = [v + 1 for v in self.face]
        if self.edge is not None:
            out["edge"] = [v + 1 for v in self.edge]
        if self.kind != "inside_P":
            out.update({"p": self.p, "q": self.q, "m": self.m, "l": self.l})
        return out

    def label(self) -> str:
        if self.kind == "inside_P":
            return "inside_P"
        tag = "".join(str(v + 1) for v in self.face or ())
        if self.kind == "inside_delta":
            return f"inside_delta({tag})"
        e = "".join(str(v + 1) for v in self.edge or ())
        return f"outside_delta({tag};{e})"


def barycentric(points: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares affine weights of ``r`` on ``points``; returns (weights, residual)."""
    aug = np.vstack([np.asarray(points, dtype=float).T, np.ones(len(points))])
    rhs = np.append(np.asarray(r, dtype=float), 1.0)
    w, *_ = np.linalg.lstsq(aug, rhs, rcond=None)
    return w, float(np.linalg.norm(aug @ w - rhs))


def in_hull(points: np.ndarray, r: np.ndarray, tol: float = REGION_TOL) -> tuple[bool, np.ndarray]:
    w, resid = barycentric(points, r)
    return bool(resid <= tol and w.min() >= -tol), w


def contraction(p: float, l: float) -> float:
    """Scale ``k = sqrt((1 - p^2)/(1 - l^2))`` of the face copy at height ``p``."""
    return math.sqrt(max(0.0, 1.0 - p * p) / (1.0 - l * l))


def _classify_on_face(r: np.ndarray, face: Face, tol: float) -> Region:
    p = float(r @ face.normal)
    k = contraction(p, face.l)
    best: Optional[Edge] = None
    best_excess = -math.inf
    for e in face.edges:
        excess = float(r @ e.omega) - k * e.m
        if excess > best_excess:
            best, best_excess = e, excess
    assert best is not None
    q = float(r @ best.omega)
    if best_excess > 0.0:
        return Region("outside_delta", face.vertices, (best.i, best.j), p, q, best.m, face.l, k, face.normal, best.omega)
    return Region("inside_delta", face.vertices, None, p, q, best.m, face.l, k, face.normal, None)


def _faces(r: np.ndarray) -> tuple[Face, ...]:
    raw = {
        (0, 1, 2): _cross(r[0] - r[2], r[1] - r[2]),
        (0, 1, 3): -_cross(r[0] - r[3], r[1] - r[3]),
        (0, 2, 3): _cross(r[0] - r[3], r[2] - r[3]),
        (1, 2, 3): -_cross(r[1] - r[3], r[2] - r[3]),
    }
    return tuple(_make_face(r, f, raw[f]) for f in FACES)


def mic_faces(p: Povm) -> tuple[np.ndarray, tuple[Face, ...]]:
    """Bloch vectors and the four faces, normals from edge cross products.

    Cached on the (immutable) POVM.
    """
    cached = p.__dict__.get("_faces")
    if cached is None:
        r = require_qubit_mic(p)
        cached = (r, _faces(r))
        object.__setattr__(p, "_faces", cached)
    return cached


def trine_face(vectors: np.ndarray, r: np.ndarray) -> Face:
    """The trine triangle as a face through the origin, normal on the side of ``r``."""
    n = _unit(np.cross(vectors[1] - vectors[0], vectors[2] - vectors[0]))
    if r @ n < 0:
        n = -n
    face = _make_face(vectors, (0, 1, 2), n)
    # _make_face flips for negative l; here l is zero so keep the chosen side.
    return Face(face.vertices, n, 0.0, face.edges)


def is_trine(p: Povm, tol: float = BLOCH_TOL) -> bool:
    if p.dim != 2 or p.n != 3:
        return False
    rep = validate(p, tol)
    return rep.unbiased and rep.extremal_rank_one


def classify_region(r: Sequence[float], p: Povm, tol: float = REGION_TOL) -> Region:
    """Locate Bloch vector ``r`` relative to a qubit MIC or trine.

    The dominant face is the one whose outward normal has the largest
    overlap with ``r`` (lowest index on ties).
    """
    v = np.asarray(r, dtype=float)
    if np.linalg.norm(v) > 1.0 + BLOCH_TOL:
        raise InputError("Bloch vector outside the unit ball")
    if is_trine(p):
        vecs = bloch_vectors(p)
        inside, _ = in_hull(vecs, v, tol)
        if inside:
            return Region("inside_P", (0, 1, 2))
        return _classify_on_face(v, trine_face(vecs, v), tol)
    vecs, faces = mic_faces(p)
    inside, _ = in_hull(vecs, v, tol)
    if inside:
        return Region("inside_P")
    heights = np.array([v @ f.normal for f in faces])
    top = float(heights.max())
    idx = int(np.flatnonzero(heights >= top - 1e-12)[0])
    return _classify_on_face(v, faces[idx], tol)
