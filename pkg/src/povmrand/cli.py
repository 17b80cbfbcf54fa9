"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 certification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Optional, Sequence

import numpy as np

from . import blochgeo, linalg, randomness, statedisc
from . import povm as pv
from .errors import CertificationError, InputError, PovmRandError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CERT = 3

THREADS_ENV = "POVMRAND_THREADS"
FAMILIES = (
    "sic",
    "skewed-sic",
    "qubit-mic",
    "group-mic",
    "trine",
    "projective",
    "qutrit-scissors",
    "ququart-scissors",
)
SWEEP_PARAMS = ("delta", "alpha", "gamma", "eps", "a")
CSV_COLUMNS = ("param_value", "pguess", "hmin", "A2", "l", "vol", "gap", "p1")


class UsageError(InputError):
    pass


# ---------------------------------------------------------------------------
# Construction and state specs
# ---------------------------------------------------------------------------


def build_povm(family: str, dim: Optional[int] = None, gamma: Optional[float] = None,
               delta: Optional[float] = None, alpha: float = 0.0, a: Optional[float] = None,
               singled: int = 0, axis: Optional[Sequence[float]] = None) -> pv.Povm:
    def need(value: Any, name: str) -> Any:
        if value is None:
            raise UsageError(f"family {family!r} needs --{name}")
        return value

    if family == "sic":
        return pv.make_sic(dim or 2)
    if family == "skewed-sic":
        return pv.make_skewed_sic(pv.SkewedSicParams(dim or 2, need(gamma, "gamma"), singled))
    if family == "qubit-mic":
        return pv.make_qubit_mic(need(delta, "delta"), alpha)
    if family == "group-mic":
        return pv.make_group_covariant_qubit_mic(need(delta, "delta"), alpha)
    if family == "trine":
        return pv.make_trine()
    if family == "projective":
        if axis is not None:
            return pv.make_projective_qubit(axis)
        return pv.make_projective(dim or 2)
    if family == "qutrit-scissors":
        return pv.make_qutrit_scissors(need(delta, "delta"))
    if family == "ququart-scissors":
        return pv.make_ququart_scissors(need(a, "a"))
    raise UsageError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def fiducial_vector(p: pv.Povm) -> np.ndarray:
    """Top eigenvector of the singled-out (default first) element."""
    k = int(p.params.get("singled", 0))
    _, v = linalg.eig_hermitian(p.elements[k])
    return v[:, -1]


def parse_state(spec: Sequence[str], p: pv.Povm) -> np.ndarray:
    """Density matrix from a named state.

    ``pure-normal [k]``: k-th optimal state for maximal randomness (qubits);
    ``isotropic EPS``: fiducial mixed with white noise; ``bloch X Y Z``;
    ``fiducial``; ``basis K``: computational basis state; ``mixed``.
    """
    if not spec:
        raise UsageError("empty state spec")
    name, args = spec[0], list(spec[1:])

    def floats(count: int) -> list[float]:
        if len(args) != count:
            raise UsageError(f"state {name!r} takes {count} argument(s), got {len(args)}")
        try:
            return [float(x) for x in args]
        except ValueError as exc:
            raise UsageError(f"bad number in state spec: {exc}") from exc

    if name == "pure-normal":
        idx = int(floats(1)[0]) if args else 0
        states = randomness.max_randomness(p).optimal_states
        if not 0 <= idx < len(states):
            raise UsageError(f"pure-normal index must be below {len(states)}")
        return pv.bloch_projector(states[idx])
    if name == "isotropic":
        (eps,) = floats(1)
        if not 0.0 <= eps <= 1.0:
            raise UsageError("isotropic noise must lie in [0, 1]")
        return pv.isotropic_state(linalg.projector(fiducial_vector(p)), eps)
    if name == "bloch":
        if p.dim != 2:
            raise UsageError("bloch states need a qubit POVM")
        r = np.array(floats(3))
        if np.linalg.norm(r) > 1.0 + 1e-12:
            raise UsageError(f"Bloch vector length {np.linalg.norm(r)!r} exceeds 1")
        return pv.bloch_projector(r)
    if name == "fiducial":
        floats(0)
        return linalg.projector(fiducial_vector(p))
    if name == "basis":
        k = int(floats(1)[0])
        if not 0 <= k < p.dim:
            raise UsageError(f"basis index must be below {p.dim}")
        return linalg.projector(np.eye(p.dim)[k])
    if name == "mixed":
        floats(0)
        return np.eye(p.dim, dtype=complex) / p.dim
    raise UsageError(f"unknown state {name!r}")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def load_povm(path: str) -> pv.Povm:
    return pv.povm_from_json(_read(path))


def _dump(obj: Any) -> str:
    return pv.dumps_canonical(obj, indent=1) + "\n"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_construct(args: argparse.Namespace) -> int:
    p = build_povm(args.family, args.dim, args.gamma, args.delta, args.alpha, args.a,
                   args.singled, args.axis)
    report = pv.validate(p).as_dict()
    if args.out:
        _write(args.out, pv.povm_to_json(p))
        sys.stdout.write(_dump(report))
    else:
        sys.stdout.write(pv.povm_to_json(p))
        sys.stderr.write(_dump(report))
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    p = load_povm(args.povm)
    report = pv.validate(p, args.tol)
    sys.stdout.write(_dump({"dim": p.dim, "n": p.n, **report.as_dict()}))
    return EXIT_OK if report.valid else EXIT_INPUT


def cmd_geometry(args: argparse.Namespace) -> int:
    p = load_povm(args.povm)
    geo = blochgeo.mic_geometry(p)
    sys.stdout.write(_dump(geo.as_dict()))
    return EXIT_OK


def _summary(report: randomness.GuessReport) -> str:
    region = report.region.label() if report.region is not None else "-"
    return (
        f"pguess {report.pguess:.6f}\n"
        f"hmin {report.hmin_bits:.6f}\n"
        f"region {region}\n"
        f"method {report.method}\n"
        f"gap {report.gap:.3e}\n"
    )


def _certify_or_fail(report: randomness.GuessReport, p: pv.Povm, rho: np.ndarray,
                     tol: float, gap_tol: float) -> int:
    cert = randomness.certify(report, p, rho, psd_tol=tol, recon_tol=tol, gap_tol=gap_tol)
    sys.stdout.write(
        f"certified {'yes' if cert.ok else 'no'} "
        f"(min slack {cert.min_slack:.3e}, reconstruction {cert.reconstruction_error:.3e}, "
        f"dual-primal {cert.value_error:.3e})\n"
    )
    return EXIT_OK if cert.ok else EXIT_CERT


def cmd_pguess(args: argparse.Namespace) -> int:
    p = load_povm(args.povm)
    rho = parse_state(args.state, p)
    report = randomness.guessing_probability(rho, p)
    if args.json:
        sys.stdout.write(_dump(report.as_dict()))
    else:
        sys.stdout.write(_summary(report))
    if args.out:
        _write(args.out, _dump(report.as_dict()))
    if args.oracle:
        oracle = randomness.oracle_pguess_qubit(blochgeo.to_bloch(rho), p, args.oracle)
        sys.stdout.write(
            f"sandwich {oracle.value:.9f} <= {report.pguess:.9f} <= {report.dual:.9f}\n"
        )
    if args.certify:
        return _certify_or_fail(report, p, rho, args.tol, args.gap_tol)
    return EXIT_OK


def report_from_dict(data: dict[str, Any]) -> randomness.GuessReport:
    try:
        decomp = tuple(
            (float(c["weight"]), pv.matrix_from_json(c["state"])) for c in data["decomposition"]
        )
        cert = data.get("certificate")
        x = pv.matrix_from_json(cert) if cert is not None else None
        return randomness.GuessReport(
            pguess=float(data["pguess"]),
            hmin_bits=float(data["hmin_bits"]),
            method=str(data.get("method", "")),
            decomposition=decomp,
            certificate=x,
            primal=float(data.get("primal", math.nan)),
            dual=float(data.get("dual", math.nan)),
            gap=float(data.get("gap", math.nan)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed report: {exc}") from exc


def cmd_certify(args: argparse.Namespace) -> int:
    p = load_povm(args.povm)
    rho = parse_state(args.state, p)
    if args.report:
        try:
            report = report_from_dict(json.loads(_read(args.report)))
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid report JSON: {exc}") from exc
    else:
        report = randomness.guessing_probability(rho, p)
        sys.stdout.write(_summary(report))
    if report.certificate is None:
        sys.stdout.write("certified no (no certificate)\n")
        return EXIT_CERT
    return _certify_or_fail(report, p, rho, args.tol, args.gap_tol)


def cmd_max_rand(args: argparse.Namespace) -> int:
    p = load_povm(args.povm)
    result = randomness.max_randomness(p)
    out: dict[str, Any] = {
        "pguess": result.pguess,
        "hmin_bits": result.hmin_bits,
        "optimal_states": [list(map(float, s)) for s in result.optimal_states],
        "gap": result.report.gap,
    }
    if args.oracle:
        val, pt = randomness.oracle_max_randomness(p, args.oracle)
        out["oracle"] = {"pguess": val, "state": list(map(float, pt))}
    sys.stdout.write(_dump(out))
    return EXIT_OK


# --- sweep -----------------------------------------------------------------


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV} must be an integer") from exc
        if n < 1:
            raise UsageError(f"{THREADS_ENV} must be positive")
        return n
    return os.cpu_count() or 1


def _fmt(x: Optional[float]) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.12g}"


def sweep_row(args: argparse.Namespace, value: float) -> list[Optional[float]]:
    kw = {
        "dim": args.dim, "gamma": args.gamma, "delta": args.delta, "alpha": args.alpha,
        "a": args.a, "singled": args.singled, "axis": None,
    }
    state = list(args.state) if args.state else None
    if args.param == "eps":
        state = ["isotropic", repr(value)]
    else:
        kw[args.param] = value
    p = build_povm(args.family, **kw)

    a2 = l = vol = None
    if p.dim == 2 and p.n == 4 and pv.validate(p).unbiased:
        geo = blochgeo.mic_geometry(p)
        a2, l, vol = geo.area_sq, geo.l, geo.ellipsoid_volume

    pguess = gap = p1 = None
    if state is not None:
        rho = parse_state(state, p)
        report = randomness.guessing_probability(rho, p)
        pguess, gap = report.pguess, report.gap
        p1 = float(p.probabilities(rho)[int(p.params.get("singled", 0))])
    elif p.dim == 2:
        result = randomness.max_randomness(p)
        pguess, gap = result.pguess, result.report.gap
    hmin = randomness.hmin(pguess) if pguess is not None else None
    return [value, pguess, hmin, a2, l, vol, gap, p1]


def _sanity(rows: list[list[Optional[float]]], param: str) -> list[str]:
    lines = []
    for idx, name in enumerate(CSV_COLUMNS[1:], start=1):
        col = [(r[0], r[idx]) for r in rows if r[idx] is not None]
        if len(col) < 2:
            continue
        vals = np.array([c[1] for c in col])
        diffs = np.diff(vals)
        if np.all(diffs >= -1e-12):
            trend = "increasing"
        elif np.all(diffs <= 1e-12):
            trend = "decreasing"
        else:
            trend = "non-monotone"
        hi, lo = int(np.argmax(vals)), int(np.argmin(vals))
        lines.append(
            f"{name}: {trend}; max {vals[hi]:.6g} at {param}={col[hi][0]:.6g}; "
            f"min {vals[lo]:.6g} at {param}={col[lo][0]:.6g}"
        )
    return lines


def cmd_sweep(args: argparse.Namespace) -> int:
    start, stop, steps = args.range
    steps_i = int(steps)
    if steps_i != steps or steps_i < 2:
        raise UsageError("steps must be an integer of at least 2")
    grid = np.linspace(start, stop, steps_i)

    def point(v: float) -> list[Optional[float]]:
        return sweep_row(args, float(v))

    # Fail fast on an invalid range before spending time on interior points.
    point(grid[0])
    point(grid[-1])
    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        rows = list(pool.map(point, grid))
    rows.sort(key=lambda r: r[0])
    text = ",".join(CSV_COLUMNS) + "\n" + "".join(",".join(_fmt(x) for x in r) + "\n" for r in rows)
    _write(args.out, text)
    notes = _sanity(rows, args.param)
    stream = sys.stdout if args.out else sys.stderr
    for line in notes:
        stream.write(line + "\n")
    return EXIT_OK


# --- discrimination ----------------------------------------------------------


def cmd_discriminate(args: argparse.Namespace) -> int:
    if args.ensemble:
        ens = statedisc.ensemble_from_json(_read(args.ensemble))
    elif args.povm and args.state:
        p = load_povm(args.povm)
        ens = statedisc.ensemble_from_state_and_povm(parse_state(args.state, p), p)
    else:
        raise UsageError("give --ensemble, or --povm with --state")
    if args.save_ensemble:
        _write(args.save_ensemble, statedisc.ensemble_to_json(ens))
    result = statedisc.pguess_discrimination(ens)
    out: dict[str, Any] = {
        "pguess": result.pguess,
        "gap": result.gap,
        "weights": [float(q) for q in result.weights],
    }
    mc = statedisc.max_confidence_povm(ens)
    out["coefficients"] = [float(c) for c in mc.coefficients]
    if isinstance(mc, statedisc.MaxConfidence):
        out["max_confidence"] = pv.povm_to_dict(mc.povm)
    else:
        out["condition_fails"] = True
    sys.stdout.write(_dump(out))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_family_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--dim", type=int)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--a", type=float)
    sp.add_argument("--singled", type=int, default=0, help="0-based index of the reweighted element")


def _add_tol_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--tol", type=float, default=1e-9,
                    help="tolerance on certificate eigenvalues and reconstruction (default 1e-9)")
    sp.add_argument("--gap-tol", type=float, default=randomness.CERT_GAP_TOL,
                    help="tolerance on |dual - primal| (default 1e-7)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="povmrand", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("construct", help="build a POVM and write canonical JSON")
    sp.add_argument("family", choices=FAMILIES)
    _add_family_args(sp)
    sp.add_argument("--axis", type=float, nargs=3)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("check", help="validate a POVM file")
    sp.add_argument("--povm", required=True)
    sp.add_argument("--tol", type=float, default=pv.POVM_TOL)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("geometry", help="Bloch geometry of a qubit MIC")
    sp.add_argument("--povm", required=True)
    sp.set_defaults(func=cmd_geometry)

    state_help = "pure-normal [k] | isotropic EPS | bloch X Y Z | fiducial | basis K | mixed"
    sp = sub.add_parser("pguess", help="guessing probability with certificate")
    sp.add_argument("--povm", required=True)
    sp.add_argument("--state", nargs="+", required=True, help=state_help)
    sp.add_argument("--certify", action="store_true")
    sp.add_argument("--oracle", type=int, metavar="N", help="also run the grid LP with N points")
    sp.add_argument("--json", action="store_true", help="print the full report as JSON")
    sp.add_argument("--out", help="write the full report JSON here")
    _add_tol_args(sp)
    sp.set_defaults(func=cmd_pguess)

    sp = sub.add_parser("max-rand", help="maximal randomness of a qubit POVM")
    sp.add_argument("--povm", required=True)
    sp.add_argument("--oracle", type=int, metavar="N", help="also minimise over N sphere points")
    sp.set_defaults(func=cmd_max_rand)

    sp = sub.add_parser("sweep", help="scan one parameter and emit CSV")
    sp.add_argument("--family", required=True, choices=FAMILIES)
    sp.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sp.add_argument("--range", required=True, type=float, nargs=3, metavar=("START", "STOP", "STEPS"))
    sp.add_argument("--state", nargs="+", help=state_help)
    _add_family_args(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("certify", help="recheck a guessing-probability certificate")
    sp.add_argument("--povm", required=True)
    sp.add_argument("--state", nargs="+", required=True, help=state_help)
    sp.add_argument("--report", help="report JSON written by 'pguess --out'")
    _add_tol_args(sp)
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("discriminate", help="discrimination of a balanced ensemble")
    sp.add_argument("--ensemble")
    sp.add_argument("--povm")
    sp.add_argument("--state", nargs="+", help=state_help)
    sp.add_argument("--save-ensemble")
    sp.set_defaults(func=cmd_discriminate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except CertificationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CERT
    except (InputError, PovmRandError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
