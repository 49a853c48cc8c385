"""Exact dense simplex over the rationals.

The exponent programs solved in this package are tiny (a handful of
variables, a few dozen rows), so a textbook two-phase tableau method with
Bland's anti-cycling rule over exact rationals (``gmpy2.mpq`` when present,
:class:`fractions.Fraction` otherwise) is fast enough and returns the
optimum with no rounding at all.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

try:  # gmpy2 rationals are an order of magnitude faster than Fraction
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

__all__ = ["InfeasibleLP", "UnboundedLP", "minimize"]


class InfeasibleLP(Exception):
    """The constraint set is empty."""


class UnboundedLP(Exception):
    """The objective decreases without bound on the feasible set."""


def _to_fraction(q) -> Fraction:
    return q if isinstance(q, Fraction) else Fraction(int(q.numerator), int(q.denominator))


def _pivot(tab: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    prow = tab[row]
    inv = _Q(1) / prow[col]
    if inv != 1:
        prow[:] = [v * inv for v in prow]
    for i, r in enumerate(tab):
        if i == row:
            continue
        f = r[col]
        if f:
            r[:] = [a - f * b for a, b in zip(r, prow)]
    basis[row] = col


def _run(tab: list[list[Fraction]], basis: list[int], ncols: int) -> None:
    # Last row holds reduced costs, last column the right-hand side.
    obj = tab[-1]
    while True:
        col = next((j for j in range(ncols) if obj[j] < 0), None)
        if col is None:
            return
        best = None
        row = None
        for i in range(len(tab) - 1):
            a = tab[i][col]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[row]):
                    best, row = ratio, i
        if row is None:
            raise UnboundedLP("objective unbounded below")
        _pivot(tab, basis, row, col)


def minimize(
    c: Sequence[Fraction],
    a_ub: Sequence[Sequence[Fraction]],
    b_ub: Sequence[Fraction],
) -> tuple[Fraction, list[Fraction]]:
    """Minimize ``c @ x`` subject to ``a_ub @ x <= b_ub`` and ``x >= 0``.

    Inputs may be ints, floats or Fractions; floats are taken at their
    exact binary value.  Results come back as Fractions.

    Returns
    -------
    value, x
        The optimal objective and one optimal vertex.

    Raises
    ------
    InfeasibleLP
        If no ``x >= 0`` satisfies the constraints.
    UnboundedLP
        If the minimum is ``-inf``.
    """
    n = len(c)
    m = len(a_ub)
    c = [_Q(v) for v in c]
    # Column layout: n structurals, m slacks, k artificials, rhs.
    neg = [i for i in range(m) if b_ub[i] < 0]
    k = len(neg)
    width = n + m + k + 1
    tab: list[list[Fraction]] = []
    basis: list[int] = []
    zero = _Q(0)
    art_of = {}
    for i in range(m):
        row = [_Q(v) for v in a_ub[i]] + [zero] * (m + k) + [_Q(b_ub[i])]
        row[n + i] = _Q(1)
        if row[-1] < 0:
            row = [-v for v in row]
            j = n + m + len(art_of)
            art_of[i] = j
            row[j] = _Q(1)
            basis.append(j)
        else:
            basis.append(n + i)
        tab.append(row)

    if k:
        # Phase 1: minimise the sum of artificials.
        obj = [zero] * width
        for j in art_of.values():
            obj[j] = _Q(1)
        for i in art_of:
            obj = [a - b for a, b in zip(obj, tab[i])]
        tab.append(obj)
        _run(tab, basis, n + m + k)
        if tab[-1][-1] != 0:
            raise InfeasibleLP("constraints are infeasible")
        tab.pop()
        # Drive any zero-level artificial out of the basis.
        for i, bj in enumerate(basis):
            if bj >= n + m:
                col = next((j for j in range(n + m) if tab[i][j] != 0), None)
                if col is not None:
                    _pivot(tab, basis, i, col)
        for r in tab:
            for j in range(n + m, n + m + k):
                r[j] = zero

    obj = c + [zero] * (m + k) + [zero]
    for i, bj in enumerate(basis):
        f = obj[bj]
        if f:
            obj = [a - f * b for a, b in zip(obj, tab[i])]
    tab.append(obj)
    _run(tab, basis, n + m)

    x = [zero] * n
    for i, bj in enumerate(basis):
        if bj < n:
            x[bj] = tab[i][-1]
    value = sum((ci * xi for ci, xi in zip(c, x)), zero)
    return _to_fraction(value), [_to_fraction(v) for v in x]


def minimize_or_none(
    c: Sequence[Fraction],
    a_ub: Sequence[Sequence[Fraction]],
    b_ub: Sequence[Fraction],
) -> Optional[Fraction]:
    """Like :func:`minimize` but return ``None`` for an empty feasible set."""
    try:
        return minimize(c, a_ub, b_ub)[0]
    except InfeasibleLP:
        return None
