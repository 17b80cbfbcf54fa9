"""Dense two-phase tableau simplex for small equality-constrained LPs.

Solves ``max c.x  s.t.  A x = b, x >= 0`` with few rows and many columns,
which is the shape of a decomposition over a fixed grid of pure states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, PovmRandError

PIVOT_TOL = 1e-11


class Infeasible(PovmRandError):
    pass


class Unbounded(PovmRandError):
    pass


@dataclass(frozen=True)
class LpResult:
    x: np.ndarray
    value: float
    basis: np.ndarray
    pivots: int


def _choose_entering(reduced: np.ndarray, bland: bool) -> int:
    """Index of an improving column (positive reduced cost), or -1."""
    cand = np.flatnonzero(reduced > PIVOT_TOL)
    if cand.size == 0:
        return -1
    if bland:
        return int(cand[0])
    return int(cand[np.argmax(reduced[cand])])


def _ratio_test(col: np.ndarray, rhs: np.ndarray, basis: np.ndarray) -> int:
    pos = np.flatnonzero(col > PIVOT_TOL)
    if pos.size == 0:
        return -1
    ratios = rhs[pos] / col[pos]
    best = ratios.min()
    # Bland tie-break: smallest basic variable index among the minimising rows.
    ties = pos[ratios <= best + 1e-14 * max(1.0, abs(best))]
    return int(ties[np.argmin(basis[ties])])


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    piv = tab[row]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, piv)


def _run(tab: np.ndarray, basis: np.ndarray, ncols: int, max_pivots: int, pivots: int) -> int:
    """Iterate on ``tab`` whose last row holds reduced costs (maximisation)."""
    degenerate_run = 0
    while pivots < max_pivots:
        reduced = tab[-1, :ncols]
        # Largest-coefficient rule normally; Bland's rule after a run of
        # degenerate pivots so cycling cannot occur.
        col = _choose_entering(reduced, bland=degenerate_run >= 5)
        if col < 0:
            return pivots
        row = _ratio_test(tab[:-1, col], tab[:-1, -1], basis)
        if row < 0:
            raise Unbounded("objective is unbounded")
        degenerate_run = degenerate_run + 1 if tab[row, -1] <= PIVOT_TOL else 0
        _pivot(tab, row, col)
        basis[row] = col
        pivots += 1
    raise PovmRandError(f"simplex exceeded {max_pivots} pivots")


def solve(c: np.ndarray, a: np.ndarray, b: np.ndarray, max_pivots: int = 100_000) -> LpResult:
    """Maximise ``c.x`` subject to ``a x = b``, ``x >= 0``.

    Raises:
        Infeasible: if phase one cannot drive the artificial variables to zero.
        Unbounded: if the objective is unbounded above.
    """
    c = np.asarray(c, dtype=float)
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    m, n = a.shape
    if c.shape != (n,) or b.shape != (m,):
        raise InputError("inconsistent LP dimensions")
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    # Phase one: minimise the sum of artificials == maximise their negative sum.
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = a
    tab[:m, n : n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :n] = a.sum(axis=0)
    tab[-1, -1] = b.sum()
    basis = np.arange(n, n + m)
    pivots = _run(tab, basis, n, max_pivots, 0)
    if tab[-1, -1] > 1e-9 * max(1.0, float(b.sum())):
        raise Infeasible(f"infeasible LP (phase-one residual {tab[-1, -1]:.3e})")
    # Drive any remaining (zero-level) artificials out of the basis.
    for row in range(m):
        if basis[row] >= n:
            cols = np.flatnonzero(np.abs(tab[row, :n]) > PIVOT_TOL)
            if cols.size:
                _pivot(tab, row, int(cols[0]))
                basis[row] = int(cols[0])

    # Phase two on the original objective.
    tab2 = np.zeros((m + 1, n + 1))
    tab2[:m, :n] = tab[:m, :n]
    tab2[:m, -1] = tab[:m, -1]
    keep = basis < n
    tab2[-1, :n] = c
    for row in np.flatnonzero(keep):
        tab2[-1] -= c[basis[row]] * tab2[row]
    tab2 = np.vstack([tab2[:m][keep], tab2[-1:]])
    basis = basis[keep]
    pivots = _run(tab2, basis, n, max_pivots, pivots)
    x = np.zeros(n)
    x[basis] = tab2[:-1, -1]
    return LpResult(x, float(c @ x), basis.copy(), pivots)
