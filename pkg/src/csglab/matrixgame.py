"""Zero-sum matrix games.

The row player maximizes, the column player minimizes.  Small cases (saddle
points, 2x2) are solved by exact closed forms; everything else goes through a
dense exact-rational simplex on the column player's LP, with the row player's
optimal mix read off the dual.  All pivoting uses Bland's rule, so the solve
terminates even on degenerate games.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import BadParams

F = Fraction


def _exact(v):
    return isinstance(v, (Fraction, int))


def matrix_game_value(payoff):
    """Value and optimal mixed strategies of a matrix game.

    Returns (value, x, y): x is the row player's optimal mix (tuple of
    probabilities over rows), y the column player's.  Exact inputs give exact
    outputs; any float input gives float outputs (the solve itself is still
    exact, floats enter only at conversion).
    """
    rows = [list(r) for r in payoff]
    if not rows or not rows[0]:
        raise BadParams("empty payoff matrix")
    m, n = len(rows), len(rows[0])
    if any(len(r) != n for r in rows):
        raise BadParams("ragged payoff matrix")
    exact_in = all(_exact(v) for r in rows for v in r)
    if not exact_in:
        fast = _solve_float_small(rows, m, n)
        if fast is not None:
            return fast
    M = [[F(v) for v in r] for r in rows]
    for r in M:
        for v in r:
            if not math.isfinite(float(v)):
                raise BadParams("payoff entries must be finite")

    value, x, y = _solve_exact(M, m, n)
    if exact_in:
        return value, tuple(x), tuple(y)
    return float(value), tuple(float(p) for p in x), tuple(float(p) for p in y)


def _solve_float_small(rows, m, n):
    """Float closed forms for saddle points and 2x2 games; None to defer."""
    for r in rows:
        for v in r:
            if not math.isfinite(v):
                raise BadParams("payoff entries must be finite")
    row_mins = [min(r) for r in rows]
    lower = max(row_mins)
    col_maxs = [max(rows[i][j] for i in range(m)) for j in range(n)]
    upper = min(col_maxs)
    if lower == upper:
        i0 = row_mins.index(lower)
        j0 = col_maxs.index(upper)
        x = [0.0] * m
        y = [0.0] * n
        x[i0] = 1.0
        y[j0] = 1.0
        return float(lower), tuple(x), tuple(y)
    if m == 2 and n == 2:
        (a, b), (c, d) = rows
        den = a - b - c + d
        if den == 0.0:
            return None
        x1 = (d - c) / den
        y1 = (d - b) / den
        v = (a * d - b * c) / den
        return v, (x1, 1.0 - x1), (y1, 1.0 - y1)
    return None


def _solve_exact(M, m, n):
    # saddle point: lexicographically smallest optimal pure pair
    row_mins = [min(r) for r in M]
    col_maxs = [max(M[i][j] for i in range(m)) for j in range(n)]
    lower = max(row_mins)
    upper = min(col_maxs)
    if lower == upper:
        i0 = row_mins.index(lower)
        j0 = col_maxs.index(upper)
        x = [F(0)] * m
        y = [F(0)] * n
        x[i0] = F(1)
        y[j0] = F(1)
        return lower, x, y
    if m == 2 and n == 2:
        return _solve_2x2(M)
    return _solve_simplex(M, m, n)


def _solve_2x2(M):
    (a, b), (c, d) = M
    den = a - b - c + d
    # no saddle point implies an interior equalizer, hence den != 0
    x1 = (d - c) / den
    y1 = (d - b) / den
    v = (a * d - b * c) / den
    return v, [x1, 1 - x1], [y1, 1 - y1]


def _solve_simplex(M, m, n):
    # Shift payoffs positive, then solve the column player's LP
    #   max sum(w)  s.t.  M' w <= 1, w >= 0
    # whose optimum gives value' = 1/sum(w), y = w*value'.  The row player's
    # mix comes from the duals on the m slack rows.
    shift = 1 - min(min(r) for r in M)
    A = [[M[i][j] + shift for j in range(n)] for i in range(m)]

    # tableau: columns = [w_1..w_n, s_1..s_m, rhs], rows = [objective, constraints]
    width = n + m + 1
    tab = [[F(0)] * width for _ in range(m + 1)]
    for j in range(n):
        tab[0][j] = F(-1)
    for i in range(m):
        for j in range(n):
            tab[1 + i][j] = A[i][j]
        tab[1 + i][n + i] = F(1)
        tab[1 + i][-1] = F(1)
    basis = [n + i for i in range(m)]

    while True:
        enter = next((j for j in range(n + m) if tab[0][j] < 0), None)
        if enter is None:
            break
        ratios = [
            (tab[1 + i][-1] / tab[1 + i][enter], basis[i], i)
            for i in range(m) if tab[1 + i][enter] > 0
        ]
        if not ratios:
            raise BadParams("unbounded matrix-game LP; entries not positive?")
        _, _, leave = min(ratios)  # Bland: smallest ratio, then smallest basis var
        _pivot(tab, 1 + leave, enter)
        basis[leave] = enter

    total = tab[0][-1]
    value_shifted = 1 / total
    w = [F(0)] * n
    for i, bv in enumerate(basis):
        if bv < n:
            w[bv] = tab[1 + i][-1]
    y = [wi * value_shifted for wi in w]
    # duals: reduced costs on the slack columns
    u = [tab[0][n + i] for i in range(m)]
    x = [ui * value_shifted for ui in u]
    return value_shifted - shift, x, y


def _pivot(tab, prow, pcol):
    piv = tab[prow][pcol]
    tab[prow] = [v / piv for v in tab[prow]]
    for r in range(len(tab)):
        if r != prow and tab[r][pcol] != 0:
            factor = tab[r][pcol]
            row = tab[prow]
            tab[r] = [v - factor * w for v, w in zip(tab[r], row)]


def duality_residual(payoff, value, x, y):
    """Worst violation of the minimax conditions at (value, x, y)."""
    m, n = len(payoff), len(payoff[0])
    col_payoffs = [sum(x[i] * payoff[i][j] for i in range(m)) for j in range(n)]
    row_payoffs = [sum(payoff[i][j] * y[j] for j in range(n)) for i in range(m)]
    worst = max(
        value - min(col_payoffs),     # x must guarantee >= value against all columns
        max(row_payoffs) - value,     # y must cap <= value against all rows
        abs(sum(x) - 1),
        abs(sum(y) - 1),
    )
    return float(worst)
