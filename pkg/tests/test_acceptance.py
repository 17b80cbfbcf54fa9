"""End-to-end acceptance checks.

Each criterion prints one PASS/FAIL line with its runtime; the lines are
repeated in the terminal summary so they survive output capture.
"""

import gc
import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize

from conftest import random_ball_point, random_mic_angles, random_state
from povmrand import blochgeo as bg
from povmrand import linalg
from povmrand import povm as pv
from povmrand import randomness as rd
from povmrand import statedisc as sd

RESULTS: list[str] = []
SIC_ANGLES = np.array([pv.SIC_DELTA, 0.0])


def _sic_geometry():
    # timed on a fresh POVM so validation is included; the collector is
    # paused around each call, as timeit does
    times = []
    for _ in range(21):
        sic = pv.make_qubit_sic()
        gc.disable()
        try:
            t0 = time.perf_counter()
            g = bg.mic_geometry(sic)
            times.append(time.perf_counter() - t0)
        finally:
            gc.enable()
    errs = [
        abs(g.area_sq - 4 / 3),
        abs(g.l**2 - 1 / 9),
        abs(g.ellipsoid_volume - 4 * math.pi / 81),
    ]
    assert max(errs) <= 1e-12, errs
    median = sorted(times)[len(times) // 2]
    assert median < 1e-3, f"median {median * 1e3:.3f} ms"
    return f"max error {max(errs):.1e}, median {median * 1e3:.2f} ms"


def _mic_max_randomness(angles):
    delta, alpha = angles
    return rd.max_randomness(pv.make_qubit_mic(delta, alpha)).pguess


def _sic_least_random():
    rng = np.random.default_rng(2)
    sic_value = rd.max_randomness(pv.make_qubit_sic()).pguess
    assert abs(sic_value - 1 / 3) <= 1e-12
    samples = [random_mic_angles(rng, margin=1e-3) for _ in range(2000)]
    values = np.array([_mic_max_randomness(s) for s in samples])
    assert values.max() <= sic_value + 1e-12, values.max()
    for s, v in zip(samples, values):
        if v >= sic_value - 1e-12:
            assert np.linalg.norm(np.array(s) - SIC_ANGLES) <= 1e-6
    # the class maximum is located by a local ascent from the best sample
    start = np.array(samples[int(np.argmax(values))])
    res = minimize(lambda x: -_mic_max_randomness(x), start, method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-17, "maxiter": 4000})
    dist = float(np.linalg.norm(res.x - SIC_ANGLES))
    assert -res.fun <= sic_value + 1e-12
    assert dist <= 1e-6, dist
    return f"sample max {values.max():.10f}, ascent lands {dist:.1e} from SIC angles"


def _max_randomness_values():
    cases = [
        ("projective", pv.make_projective_qubit([0, 0, 1]), 0.5),
        ("trine", pv.make_trine(), 1 / 3),
        ("sic", pv.make_qubit_sic(), 1 / 3),
        ("mic(pi/4,0)", pv.make_qubit_mic(math.pi / 4, 0.0), (1 + 1 / math.sqrt(10)) / 4),
    ]
    worst_exact = worst_oracle = 0.0
    for name, p, expected in cases:
        val = rd.max_randomness(p).pguess
        oracle, _ = rd.oracle_max_randomness(p, n_points=100_000)
        worst_exact = max(worst_exact, abs(val - expected))
        worst_oracle = max(worst_oracle, abs(val - oracle))
        assert abs(val - expected) <= 1e-10, (name, val)
        assert abs(val - oracle) <= 1e-4, (name, val, oracle)
    return f"closed form error {worst_exact:.1e}, oracle error {worst_oracle:.1e}"


def _skewed_uniformity():
    worst = 0.0
    for d in (2, 3, 4):
        sk = pv.make_skewed_sic(pv.SkewedSicParams(d, 1 / d**2))
        proj = pv.make_sic(d).elements[0] * d
        probs = sk.probabilities(proj)
        dev = float(np.max(np.abs(probs - 1 / d**2)))
        worst = max(worst, dev)
        assert dev <= 1e-12, (d, dev)
        assert abs(rd.hmin(probs.max()) - 2 * math.log2(d)) <= 1e-10
    return f"max deviation {worst:.1e}"


def _noisy_saturation():
    eps = 0.5
    gamma = pv.gamma_for_noisy_state(2, eps)
    sk = pv.make_skewed_sic(pv.SkewedSicParams(2, gamma))
    proj = pv.make_sic(2).elements[0] * 2
    rho = pv.isotropic_state(proj, eps)
    rep = rd.pguess_square_root(rho, sk)
    overlaps = rep.extras["sqrt_overlaps"]
    spread = float(np.ptp(overlaps))
    assert spread <= 1e-10, spread
    target = rep.extras["trace_sqrt"] ** 2 / 4
    assert abs(rep.primal - target) <= 1e-9
    assert abs(target - 0.466506) <= 1e-6
    cert = rd.certify(rep, sk, rho, gap_tol=1e-7)
    assert cert.ok and cert.value_error <= 1e-7, cert
    return f"overlap spread {spread:.1e}, value {rep.primal:.9f}, gap {cert.value_error:.1e}"


def _random_family_povm(family, rng):
    if family == "projective":
        axis = rng.normal(size=3)
        return pv.make_projective_qubit(axis / np.linalg.norm(axis))
    if family == "trine":
        return pv.make_trine().conjugated(pv.haar_unitary(2, rng))
    return pv.make_qubit_mic(*random_mic_angles(rng))


def _closed_form_sandwich():
    rng = np.random.default_rng(6)
    widest = worst_gap = 0.0
    for family in ("projective", "trine", "mic"):
        for _ in range(500):
            p = _random_family_povm(family, rng)
            r = random_ball_point(rng, 0.95)
            rep = rd.guessing_probability(r, p)
            assert rep.method == "closed-form"
            oracle = rd.oracle_pguess_qubit(r, p, grid_size=20_000).value
            slack = rd.min_slack(rep.certificate, p)
            assert slack >= -1e-9, (family, r, slack)
            assert oracle <= rep.pguess + 1e-12 <= rep.dual + 2e-12, (family, r, oracle, rep.pguess, rep.dual)
            widest = max(widest, rep.dual - oracle)
            worst_gap = max(worst_gap, rep.dual - rep.pguess)
    assert widest <= 5e-3, widest
    assert worst_gap <= 1e-8, worst_gap
    return f"widest sandwich {widest:.1e}, worst certificate gap {worst_gap:.1e}"


def _general_solver():
    rng = np.random.default_rng(7)
    worst_match = 0.0
    worst_bound = -math.inf
    for _ in range(200):
        p = pv.make_qubit_mic(*random_mic_angles(rng))
        r = random_ball_point(rng, 0.97)
        general = rd.pguess_unbiased_general(pv.bloch_projector(r), p)
        closed = rd.pguess_qubit_mic(r, p)
        worst_match = max(worst_match, abs(general.pguess - closed.pguess))
        worst_bound = max(worst_bound, general.pguess - 0.5)
    assert worst_match <= 1e-6, worst_match
    worst_p = 0.0
    for d, make in ((2, lambda: pv.make_qubit_mic(*random_mic_angles(rng))), (3, lambda: pv.make_sic(3))):
        for _ in range(20):
            p = make()
            w = rng.dirichlet(np.ones(p.n))
            rho = np.tensordot(w, p.elements * d, axes=1)  # a point of the polytope
            rep = rd.pguess_unbiased_general(rho, p)
            worst_p = max(worst_p, abs(rep.pguess - d / p.n))
            worst_bound = max(worst_bound, rep.pguess - d / p.n)
    assert worst_p <= 1e-7, worst_p
    assert worst_bound <= 1e-9, worst_bound
    return f"match {worst_match:.1e}, polytope error {worst_p:.1e}, max excess over d/n {worst_bound:.1e}"


def _boundary_continuity():
    rng = np.random.default_rng(8)
    worst = 0.0
    for i in range(1000):
        if i % 2:
            l, m, n_out = 0.0, 0.5, 3
        else:
            g = bg.mic_geometry(pv.make_qubit_mic(*random_mic_angles(rng)))
            face = g.faces[rng.integers(4)]
            l, m, n_out = face.l, face.edges[rng.integers(3)].m, 4
        p = rng.uniform(l, 1.0)
        k = math.sqrt((1 - p * p) / (1 - l * l))
        inside = rd.inside_delta_value(p, l, n_out)
        outside = rd.outside_delta_value(p, k * m, l, m, n_out)
        worst = max(worst, abs(inside - outside))
    assert worst <= 1e-9, worst
    return f"max disagreement {worst:.1e}"


def _higher_sic_recovery():
    a_sic = pv.QUQUART_SIC_A
    assert pv.check_sic(pv.make_qutrit_scissors(pv.QUTRIT_SIC_DELTA), tol=1e-10)
    assert pv.check_sic(pv.make_ququart_scissors(a_sic), tol=1e-10)
    for h in (-1e-3, 1e-3):
        assert not pv.check_sic(pv.make_qutrit_scissors(pv.QUTRIT_SIC_DELTA + h), tol=1e-10)
        assert not pv.check_sic(pv.make_ququart_scissors(a_sic + h), tol=1e-10)
    worst = 0.0
    for a in (1.01, 1.5, 2.0, 3.0, a_sic):
        probs = np.sort(pv.make_ququart_scissors(a).probabilities(np.diag([1.0, 0, 0, 0])))
        expected = np.sort([a * a / (4 * (3 + a * a))] * 4 + [1 / (4 * (3 + a * a))] * 12)
        worst = max(worst, float(np.max(np.abs(probs - expected))))
    assert worst <= 1e-12, worst
    return f"probability error {worst:.1e}"


def _gram_identities():
    rng = np.random.default_rng(10)
    gram_err = bio_err = eig_err = 0.0
    for _ in range(200):
        g = bg.mic_geometry(pv.make_qubit_mic(*random_mic_angles(rng)))
        gram_err = max(gram_err, float(np.max(np.abs(g.gram @ g.gram_inv - np.eye(4)))))
        duals = [0.25 * (np.eye(2) + sum(x * s for x, s in zip(f, pv.PAULIS))) for f in g.dual_vectors]
        projectors = [pv.bloch_projector(r) for r in g.vectors]
        overlaps = np.array([[np.trace(f @ q).real for q in projectors] for f in duals])
        bio_err = max(bio_err, float(np.max(np.abs(overlaps - np.eye(4)))))
        expected, _ = bg.ellipsoid_eigen_closed_form(g.a, g.b, g.c)
        expected = np.sort(expected)
        # eigenvalues near degenerate angles reach ~1e8, whose spacing exceeds 1e-9
        err = np.abs(np.sort(g.ellipsoid_eigenvalues) - expected) / np.maximum(expected, 1.0)
        eig_err = max(eig_err, float(err.max()))
    assert gram_err <= 1e-10 and bio_err <= 1e-10, (gram_err, bio_err)
    assert eig_err <= 1e-9, eig_err
    return f"gram {gram_err:.1e}, biorthogonality {bio_err:.1e}, ellipsoid {eig_err:.1e} (scaled)"


def _group_covariance():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(200):
        delta, alpha = random_mic_angles(rng)
        a = pv.make_group_covariant_qubit_mic(delta, alpha).elements
        b = pv.make_qubit_mic(delta, alpha).elements
        worst = max(worst, float(np.max(np.abs(a - b))))
    assert worst <= 1e-10, worst
    return f"max element difference {worst:.1e}"


def _discrimination_equivalence():
    rng = np.random.default_rng(12)
    worst = 0.0
    for i in range(100):
        d = (2, 3, 4)[i % 3]
        p = pv.make_sic(d)
        rho = random_state(d, rng)
        disc = sd.pguess_discrimination(sd.ensemble_from_state_and_povm(rho, p)).pguess
        worst = max(worst, abs(disc - rd.guessing_probability(rho, p).pguess))
    assert worst <= 1e-7, worst
    for d in (2, 3, 4):
        e = sd.ensemble_from_state_and_povm(np.eye(d) / d, pv.make_sic(d))
        mc = sd.max_confidence_povm(e)
        assert isinstance(mc, sd.MaxConfidence)
        assert np.max(np.abs(mc.coefficients - 1 / d)) <= 1e-12
        assert abs(mc.pguess - d / d**2) <= 1e-15
        assert abs(mc.success - 1 / d) <= 1e-12
        assert abs(sd.pguess_discrimination(e).pguess - 1 / d) <= 1e-9
        assert all(linalg.psd_check(mc.dual - s, 1e-12)[0] for s in e.states)
    return f"max disagreement {worst:.1e}"


CRITERIA = [
    (1, "SIC geometry", _sic_geometry, 1.0),
    (2, "SIC least random among qubit MICs", _sic_least_random, 5.0),
    (3, "maximal randomness values", _max_randomness_values, 30.0),
    (4, "skewed SIC uniformity", _skewed_uniformity, 1.0),
    (5, "noisy-state saturation", _noisy_saturation, 1.0),
    (6, "closed-form sandwich", _closed_form_sandwich, 180.0),
    (7, "general solver", _general_solver, 120.0),
    (8, "boundary continuity", _boundary_continuity, 5.0),
    (9, "qutrit/ququart SIC recovery", _higher_sic_recovery, 1.0),
    (10, "Gram and dual-basis identities", _gram_identities, 5.0),
    (11, "group covariance", _group_covariance, 1.0),
    (12, "discrimination equivalence", _discrimination_equivalence, 60.0),
]


@pytest.mark.parametrize(
    "number,name,check,budget", CRITERIA, ids=[f"{c[0]:02d}-{c[1].replace(' ', '-')}" for c in CRITERIA]
)
def test_criterion(number, name, check, budget):
    t0 = time.perf_counter()
    detail, error = "", None
    try:
        detail = check()
    except AssertionError as exc:
        error = exc
    elapsed = time.perf_counter() - t0
    ok = error is None and elapsed < budget
    if error is not None:
        detail = f"failed: {error}"
    elif not ok:
        detail += f"; over budget {budget:g} s"
    line = f"{'PASS' if ok else 'FAIL'} {number:2d} {name} ({elapsed:.2f} s): {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line
