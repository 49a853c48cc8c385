"""Outage regions over fading exponents and their exact infimum.

An :class:`ExponentLp` describes the high-SNR outage event of a channel in
terms of the exponents ``alpha`` of its fading variables
(``|v|^2 ~ SNR^-alpha``).  Each constraint reads

    linear(alpha) + sum_j c_j * (e_j(alpha))^+  <=  RHS

where ``RHS`` is the per-frame multiplexing gain ``M * r``, ``0``, or
``max{M * r, phi(alpha)}``.  The diversity order at ``r`` is the infimum of
the weighted sum ``sum_i w_i alpha_i`` over the region.  Strict inequalities
are closed, which leaves the infimum unchanged.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .simplex import minimize_or_none

__all__ = [
    "Affine",
    "Constraint",
    "ExponentLp",
    "solve_exponent_lp",
    "one_minus",
]

Number = Union[int, float, Fraction]


@dataclass(frozen=True)
class Affine:
    """``const + sum(coef * alpha[name])`` with exact coefficients."""

    const: Fraction = Fraction(0)
    terms: tuple[tuple[str, Fraction], ...] = ()

    @classmethod
    def of(cls, const: Number = 0, coeffs: Optional[Mapping[str, Number]] = None) -> "Affine":
        acc: dict[str, Fraction] = {}
        for name, c in (coeffs or {}).items():
            acc[name] = acc.get(name, Fraction(0)) + Fraction(c)
        terms = tuple(sorted((k, v) for k, v in acc.items() if v != 0))
        return cls(Fraction(const), terms)

    def __add__(self, other: "Affine") -> "Affine":
        acc = dict(self.terms)
        for k, v in other.terms:
            acc[k] = acc.get(k, Fraction(0)) + v
        return Affine.of(self.const + other.const, acc)

    def __neg__(self) -> "Affine":
        return Affine(-self.const, tuple((k, -v) for k, v in self.terms))

    def __sub__(self, other: "Affine") -> "Affine":
        return self + (-other)

    def scale(self, k: Number) -> "Affine":
        k = Fraction(k)
        return Affine.of(self.const * k, {n: v * k for n, v in self.terms})

    def names(self) -> set[str]:
        return {k for k, _ in self.terms}

    def evaluate(self, alpha: Mapping[str, float]) -> float:
        return float(self.const) + sum(float(v) * alpha[k] for k, v in self.terms)

    def __str__(self) -> str:
        parts = []
        if self.const != 0 or not self.terms:
            parts.append(_fmt(self.const))
        for name, v in self.terms:
            sign = "-" if v < 0 else "+"
            mag = abs(v)
            coef = "" if mag == 1 else f"{_fmt(mag)}*"
            if not parts:
                parts.append(("-" if v < 0 else "") + f"{coef}{name}")
            else:
                parts.append(f"{sign} {coef}{name}")
        return " ".join(parts)


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def one_minus(*names: str) -> Affine:
    """The exponent expression ``1 - sum(alpha[name])``."""
    return Affine.of(1, {n: -1 for n in names})


def var(name: str, coef: Number = 1) -> Affine:
    return Affine.of(0, {name: coef})


@dataclass(frozen=True)
class Constraint:
    """One inequality of an outage region.

    ``rate`` selects whether the right-hand side contains the per-frame
    multiplexing gain ``M * r``; when ``phi`` is also given the right-hand
    side is ``max{M * r, phi}``.  Truncated terms must carry positive
    coefficients.
    """

    linear: Affine = Affine()
    truncated: tuple[tuple[Fraction, Affine], ...] = ()
    rate: bool = True
    phi: Optional[Affine] = None

    def __post_init__(self):
        for c, _ in self.truncated:
            if c <= 0:
                raise ValueError("truncated terms need positive coefficients")
        if self.phi is not None and not self.rate:
            raise ValueError("a max{r, phi} right-hand side needs rate=True")

    def names(self) -> set[str]:
        out = set(self.linear.names())
        for _, e in self.truncated:
            out |= e.names()
        if self.phi is not None:
            out |= self.phi.names()
        return out

    def lhs_value(self, alpha: Mapping[str, float]) -> float:
        v = self.linear.evaluate(alpha)
        for c, e in self.truncated:
            v += float(c) * max(0.0, e.evaluate(alpha))
        return v

    def __str__(self) -> str:
        pieces = []
        if self.linear.terms or self.linear.const != 0 or not self.truncated:
            pieces.append(str(self.linear))
        for c, e in self.truncated:
            coef = "" if c == 1 else f"{_fmt(c)}*"
            pieces.append(f"{coef}({e})^+")
        if not self.rate:
            rhs = "0"
        elif self.phi is None:
            rhs = "M*r"
        else:
            rhs = f"max{{M*r, {self.phi}}}"
        return " + ".join(pieces) + f" <= {rhs}"


def plus_constraint(*terms: tuple[Number, Affine], linear: Affine = Affine(), phi=None) -> Constraint:
    return Constraint(linear, tuple((Fraction(c), e) for c, e in terms), True, phi)


@dataclass(frozen=True)
class ExponentLp:
    """A union of outage regions over named fading exponents.

    Attributes
    ----------
    name : str
        Label used in listings and CLI output.
    n_slots : int
        Frame length ``M``; the rate side of every constraint is ``M * r``.
    variables : tuple of (name, weight)
        Exponents and their weights in the objective.
    regions : tuple of tuple of Constraint
        The outage region is the union of these constraint groups.
    upper : Fraction
        Box bound applied to every exponent.
    """

    name: str
    n_slots: int
    variables: tuple[tuple[str, Fraction], ...]
    regions: tuple[tuple[Constraint, ...], ...]
    upper: Fraction = field(default=Fraction(2))

    def __post_init__(self):
        declared = {n for n, _ in self.variables}
        if len(declared) != len(self.variables):
            raise ValueError("duplicate variable names")
        for _, w in self.variables:
            if w <= 0:
                raise ValueError("objective weights must be positive")
        for region in self.regions:
            for c in region:
                missing = c.names() - declared
                if missing:
                    raise ValueError(f"undeclared variables {sorted(missing)}")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.variables]

    def objective(self, alpha: Mapping[str, float]) -> float:
        return sum(float(w) * alpha[n] for n, w in self.variables)

    def contains(self, alpha: Mapping[str, float], r: float, tol: float = 1e-12) -> bool:
        """Membership test for a point, used by brute-force oracles."""
        rp = self.n_slots * r
        for region in self.regions:
            ok = True
            for c in region:
                rhs = rp if c.rate else 0.0
                if c.phi is not None:
                    rhs = max(rhs, c.phi.evaluate(alpha))
                if c.lhs_value(alpha) > rhs + tol:
                    ok = False
                    break
            if ok:
                return True
        return False

    def listing(self) -> str:
        """Human-readable constraint listing for audit."""
        lines = [f"# {self.name}  (M = {self.n_slots}, 0 <= alpha <= {_fmt(self.upper)})"]
        obj = " + ".join(
            (n if w == 1 else f"{_fmt(w)}*{n}") for n, w in self.variables
        )
        lines.append(f"minimize {obj}")
        for k, region in enumerate(self.regions):
            lines.append(f"region {k + 1}:")
            lines.extend(f"  {c}" for c in region)
        return "\n".join(lines)


def _row(expr: Affine, bound: Fraction, index: Mapping[str, int], n: int):
    """Encode ``expr <= bound`` as a dense row."""
    row = [Fraction(0)] * n
    for k, v in expr.terms:
        row[index[k]] += v
    return row, bound - expr.const


def _case_lps(instance: ExponentLp, region: Sequence[Constraint], rp: Fraction):
    """Yield the ordinary LPs whose union is ``region`` at gain ``rp``."""
    names = instance.names
    index = {n: i for i, n in enumerate(names)}
    n = len(names)
    rp_aff = Affine.of(rp)

    phis: list[Affine] = []
    for c in region:
        if c.phi is not None and c.phi not in phis:
            phis.append(c.phi)

    for phi_case in itertools.product((True, False), repeat=len(phis)):
        base: list[tuple[Affine, list[tuple[Fraction, Affine]]]] = []
        for phi, t in zip(phis, phi_case):
            # T: r <= phi, constraints bounded by phi; complement: phi <= r.
            base.append(((rp_aff - phi) if t else (phi - rp_aff), []))
        for c in region:
            if c.phi is not None:
                t = phi_case[phis.index(c.phi)]
                rhs = c.phi if t else rp_aff
            else:
                rhs = rp_aff if c.rate else Affine()
            base.append((c.linear - rhs, list(c.truncated)))

        terms: list[Affine] = []
        for _, trunc in base:
            for _, e in trunc:
                if e not in terms:
                    terms.append(e)

        for pattern in itertools.product((True, False), repeat=len(terms)):
            active = dict(zip(terms, pattern))
            rows = []
            rhs = []
            for e, on in active.items():
                # active: e >= 0, term kept; inactive: e <= 0, term dropped
                r_, b_ = _row(-e if on else e, Fraction(0), index, n)
                rows.append(r_)
                rhs.append(b_)
            for lin, trunc in base:
                expr = lin
                for coef, e in trunc:
                    if active[e]:
                        expr = expr + e.scale(coef)
                r_, b_ = _row(expr, Fraction(0), index, n)
                rows.append(r_)
                rhs.append(b_)
            for i in range(n):
                r_ = [Fraction(0)] * n
                r_[i] = Fraction(1)
                rows.append(r_)
                rhs.append(instance.upper)
            yield rows, rhs


def solve_exponent_lp(
    instance: ExponentLp, r: Number, exact: bool = False
) -> Union[float, Fraction]:
    """Infimum of the exponent objective over the outage region at gain ``r``.

    ``r`` is the multiplexing gain per channel use; the region is evaluated
    at ``M * r``.  Returns ``math.inf`` when the region is empty.  With
    ``exact=True`` the optimum is returned as a :class:`Fraction`.
    """
    r = Fraction(r)
    if r < 0 or r > 1:
        raise ValueError("multiplexing gain must lie in [0, 1]")
    rp = instance.n_slots * r
    cost = [w for _, w in instance.variables]
    best: Optional[Fraction] = None
    for region in instance.regions:
        for rows, rhs in _case_lps(instance, region, rp):
            v = minimize_or_none(cost, rows, rhs)
            if v is not None and (best is None or v < best):
                best = v
                if best == 0:
                    break
    if best is None:
        return math.inf
    return best if exact else float(best)


def count_cases(instance: ExponentLp) -> int:
    """Number of ordinary LPs the enumeration solves for one ``r``."""
    total = 0
    for region in instance.regions:
        total += sum(1 for _ in _case_lps(instance, region, Fraction(0)))
    return total


def iter_constraints(instance: ExponentLp) -> Iterable[Constraint]:
    for region in instance.regions:
        yield from region
