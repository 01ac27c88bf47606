"""Dense phase-I simplex for equality-form feasibility: find x >= 0 with A x = b.

Bland's smallest-index rule on both the entering and leaving choice makes the
walk deterministic and cycle-free.  Problems here are tiny (at most a few
hundred rows), so a plain dense tableau is the right tool.  A Fraction-valued
twin runs the identical pivot sequence in exact arithmetic.

On infeasible instances the phase-I multipliers form a Farkas certificate:
y with y'A <= 0 columnwise and y'b > 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

PIVOT_TOL = 1e-11
MAX_PIVOTS_FACTOR = 2000  # hard stop: cycling guard (Bland should never hit it)


class SimplexError(RuntimeError):
    pass


@dataclass
class PhaseOneResult:
    objective: float            # minimal total artificial mass (0 <=> feasible)
    x: np.ndarray               # primal point for the original variables
    y: np.ndarray               # simplex multipliers (Farkas certificate if infeasible)
    pivots: int


def phase_one(a, b, tol: float = PIVOT_TOL) -> PhaseOneResult:
    """Minimize the total artificial mass of A x + s = b, x, s >= 0."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    m, n = a.shape
    if b.shape != (m,):
        raise ValueError("b must match the row count of A")
    flip = np.where(b < 0.0, -1.0, 1.0)
    a = a * flip[:, None]
    b = b * flip

    # tableau: columns [x (n) | artificials (m) | rhs]
    tab = np.zeros((m, n + m + 1))
    tab[:, :n] = a
    tab[:, n:n + m] = np.eye(m)
    tab[:, -1] = b
    basis = list(range(n, n + m))
    # phase-I cost row (reduced costs) and objective, for c = [0...0, 1...1]
    cost = np.zeros(n + m + 1)
    cost[:n] = -a.sum(axis=0)
    cost[-1] = -b.sum()  # negative of current objective

    max_pivots = MAX_PIVOTS_FACTOR * (m + n)
    pivots = 0
    while True:
        entering = -1
        for j in range(n + m):
            if cost[j] < -tol:
                entering = j
                break
        if entering < 0:
            break
        rows = np.nonzero(tab[:, entering] > tol)[0]
        if rows.size == 0:
            raise SimplexError("phase-I column unbounded; input is malformed")
        ratios = tab[rows, -1] / tab[rows, entering]
        best = ratios.min()
        # Bland tie-break: smallest basis variable among the minimal ratios
        tie = rows[ratios <= best + tol * (1.0 + abs(best))]
        leave = min(tie, key=lambda r: basis[r])
        piv = tab[leave, entering]
        tab[leave] /= piv
        col = tab[:, entering].copy()
        col[leave] = 0.0
        tab -= np.outer(col, tab[leave])
        cost -= cost[entering] * tab[leave]
        basis[leave] = entering
        pivots += 1
        if pivots > max_pivots:
            raise SimplexError("pivot limit exceeded (cycling guard)")

    x = np.zeros(n)
    resid = 0.0
    for r, var in enumerate(basis):
        if var < n:
            x[var] = tab[r, -1]
        else:
            resid += tab[r, -1]
    # multipliers: y_i = 1 - reduced cost of artificial i, then unflip rows
    y = (1.0 - cost[n:n + m]) * flip
    return PhaseOneResult(objective=float(resid), x=x, y=y, pivots=pivots)


def phase_one_exact(a_rows, b) -> tuple[Fraction, list[Fraction], list[Fraction]]:
    """Fraction-arithmetic twin of ``phase_one``; returns (objective, x, y).

    Inputs are nested sequences of Fractions (floats are converted exactly).
    Zero tolerance everywhere: the verdict is exact for the given data.
    """
    a = [[Fraction(v) for v in row] for row in a_rows]
    m = len(a)
    n = len(a[0]) if m else 0
    b = [Fraction(v) for v in b]
    flip = [(-1 if bi < 0 else 1) for bi in b]
    a = [[v * s for v in row] for row, s in zip(a, flip)]
    b = [bi * s for bi, s in zip(b, flip)]

    zero, one = Fraction(0), Fraction(1)
    tab = [row[:] + [one if i == j else zero for j in range(m)] + [b[i]]
           for i, row in enumerate(a)]
    basis = list(range(n, n + m))
    cost = [-(sum(tab[i][j] for i in range(m))) for j in range(n)] \
        + [zero] * m + [-(sum(b))]

    pivots = 0
    while True:
        entering = next((j for j in range(n + m) if cost[j] < 0), -1)
        if entering < 0:
            break
        candidates = [(tab[i][-1] / tab[i][entering], basis[i], i)
                      for i in range(m) if tab[i][entering] > 0]
        if not candidates:
            raise SimplexError("phase-I column unbounded; input is malformed")
        best = min(c[0] for c in candidates)
        leave = min(i for ratio, var, i in candidates if ratio == best)
        piv = tab[leave][entering]
        tab[leave] = [v / piv for v in tab[leave]]
        for i in range(m):
            if i != leave and tab[i][entering] != 0:
                f = tab[i][entering]
                tab[i] = [vi - f * vl for vi, vl in zip(tab[i], tab[leave])]
        f = cost[entering]
        if f != 0:
            cost = [ci - f * vl for ci, vl in zip(cost, tab[leave])]
        basis[leave] = entering
        pivots += 1
        if pivots > MAX_PIVOTS_FACTOR * (m + n):
            raise SimplexError("pivot limit exceeded (cycling guard)")

    x = [zero] * n
    resid = zero
    for r, var in enumerate(basis):
        if var < n:
            x[var] = tab[r][-1]
        else:
            resid += tab[r][-1]
    y = [(one - cost[n + i]) * flip[i] for i in range(m)]
    return resid, x, y
