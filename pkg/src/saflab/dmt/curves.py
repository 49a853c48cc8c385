"""Piecewise-linear DMT curves: closed forms and LP-derived curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence, Union

import numpy as np

from .exponent import ExponentLp, solve_exponent_lp

__all__ = [
    "DmtCurve",
    "miso_bound",
    "saf_upper_bound",
    "naf_dmt",
    "noncoop_dmt",
    "dmt_curve_from_lp",
]

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class DmtCurve:
    """Diversity gain ``d(r)``, linear between ``breakpoints``.

    Breakpoints are ``(r, d)`` pairs with strictly increasing ``r`` covering
    ``[0, 1]``; ``d`` is non-increasing and non-negative.
    """

    breakpoints: tuple[tuple[float, float], ...]
    label: str = ""

    def __post_init__(self):
        pts = self.breakpoints
        if len(pts) < 2:
            raise ValueError("a curve needs at least two breakpoints")
        rs = [p[0] for p in pts]
        ds = [p[1] for p in pts]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("breakpoint r must be strictly increasing")
        if any(b > a + 1e-12 for a, b in zip(ds, ds[1:])):
            raise ValueError("d(r) must be non-increasing")
        if min(ds) < -1e-12:
            raise ValueError("d(r) must be non-negative")

    def __call__(self, r):
        rs, ds = zip(*self.breakpoints)
        return np.interp(r, rs, ds)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self.breakpoints)

    @classmethod
    def from_points(cls, points: Sequence[tuple[Number, Number]], label: str = "") -> "DmtCurve":
        """Build a curve, dropping interior points that lie on a straight line."""
        pts = [(Fraction(r), Fraction(d)) for r, d in points]
        kept = [pts[0]]
        for i in range(1, len(pts) - 1):
            (r0, d0), (r1, d1), (r2, d2) = kept[-1], pts[i], pts[i + 1]
            if (d1 - d0) * (r2 - r1) != (d2 - d1) * (r1 - r0):
                kept.append(pts[i])
        kept.append(pts[-1])
        return cls(tuple((float(r), float(d)) for r, d in kept), label)

    def sample(self, n_points: int) -> list[tuple[float, float]]:
        rs = np.linspace(0.0, 1.0, n_points)
        return [(float(r), float(d)) for r, d in zip(rs, self(rs))]


def miso_bound(n_relays: int) -> DmtCurve:
    """Transmit diversity bound ``(N + 1)(1 - r)^+``."""
    if n_relays < 0:
        raise ValueError("n_relays must be >= 0")
    return DmtCurve(((0.0, float(n_relays + 1)), (1.0, 0.0)), f"miso(N={n_relays})")


def noncoop_dmt() -> DmtCurve:
    return DmtCurve(((0.0, 1.0), (1.0, 0.0)), "noncoop")


def saf_upper_bound(n_relays: int, n_slots: int) -> DmtCurve:
    """``(1 - r)^+ + N (1 - M r / (M - 1))^+`` for an N-relay M-slot SAF."""
    if n_slots < 2:
        raise ValueError("the SAF upper bound needs n_slots >= 2")
    if n_relays < 0:
        raise ValueError("n_relays must be >= 0")
    M = n_slots
    knee = Fraction(M - 1, M)
    pts = [(0, 1 + n_relays), (knee, 1 - knee), (1, 0)]
    return DmtCurve.from_points(pts, f"ub(N={n_relays},M={M})")


def naf_dmt(n_relays: int) -> DmtCurve:
    """DMT of the N-relay NAF scheme, ``(1 - r)^+ + N (1 - 2r)^+``."""
    if n_relays < 1:
        raise ValueError("NAF needs at least one relay")
    c = saf_upper_bound(n_relays, 2)
    return DmtCurve(c.breakpoints, f"naf(N={n_relays})")


def _locate(
    f: Callable[[Fraction], Fraction],
    a: Fraction,
    fa: Fraction,
    b: Fraction,
    fb: Fraction,
    resolution: Fraction,
    out: list,
) -> None:
    """Append ``("lin", a, b)`` pieces and ``("kink", a, b)`` brackets."""
    m = (a + b) / 2
    fm = f(m)
    if 2 * fm == fa + fb:
        out.append(("lin", a, fa, b, fb))
        return
    if b - a <= resolution:
        out.append(("kink", a, fa, b, fb))
        return
    _locate(f, a, fa, m, fm, resolution, out)
    _locate(f, m, fm, b, fb, resolution, out)


def _slope(piece) -> Fraction:
    _, a, fa, b, fb = piece
    return (fb - fa) / (b - a)


def dmt_curve_from_lp(
    instance: ExponentLp,
    r_grid_size: int = 101,
    resolution: float = 1e-7,
    label: str = "",
) -> DmtCurve:
    """Trace the piecewise-linear ``d(r)`` of an exponent LP on ``[0, 1]``.

    The LP is solved exactly on a uniform grid.  Grid cells whose midpoint
    leaves the chord are bisected down to ``resolution``; each remaining
    bracket is resolved to the intersection of the neighbouring linear
    pieces, which is exact when the bracket holds a single kink.
    """
    if r_grid_size < 11:
        raise ValueError("r_grid_size must be >= 11")
    cache: dict[Fraction, Fraction] = {}

    def f(r: Fraction) -> Fraction:
        if r not in cache:
            v = solve_exponent_lp(instance, r, exact=True)
            if v == math.inf:
                raise ValueError(f"outage region of {instance.name} is empty at r={r}")
            cache[r] = v
        return cache[r]

    res = Fraction(resolution)
    grid = [Fraction(i, r_grid_size - 1) for i in range(r_grid_size)]
    pieces: list = []
    for a, b in zip(grid, grid[1:]):
        _locate(f, a, f(a), b, f(b), res, pieces)

    points: list[tuple[Fraction, Fraction]] = [(grid[0], f(grid[0]))]
    for i, p in enumerate(pieces):
        kind, a, fa, b, fb = p
        if kind == "lin":
            points.append((b, fb))
            continue
        left = next((q for q in reversed(pieces[:i]) if q[0] == "lin"), None)
        right = next((q for q in pieces[i + 1:] if q[0] == "lin"), None)
        x = None
        if left is not None and right is not None:
            sl, sr = _slope(left), _slope(right)
            if sl != sr:
                # lines through (a, fa) and (b, fb)
                x = (fb - fa + sl * a - sr * b) / (sl - sr)
                if not (a <= x <= b):
                    x = None
        if x is not None and a < x < b:
            points.append((x, f(x)))
        points.append((b, fb))
    return DmtCurve.from_points(points, label or instance.name)
