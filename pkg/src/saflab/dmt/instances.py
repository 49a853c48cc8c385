"""Outage regions of the genie-aided and sequential SAF channels.

All instances use the per-frame rate ``M * r`` on their right-hand sides.
Exponent names follow the link they describe: ``a_g0`` for the direct
link, ``a_g{i}``/``a_h{i}`` for relay-destination and source-relay links,
``a_gh{i}`` for the product ``g_i h_i`` of the relayed path, ``a_gam`` for
the inter-relay link and ``a_theta`` for the phase variable of the
two-relay three-slot analysis.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .exponent import Affine, Constraint, ExponentLp, one_minus, plus_constraint

__all__ = [
    "genie_instance",
    "dumb_instance",
    "smart_instance",
    "two_relay_three_slot_instance",
    "zero_instance",
    "INSTANCE_BUILDERS",
]

ONE = Fraction(1)


def _check_slots(n_relays: int, n_slots: int) -> None:
    if n_relays < 1:
        raise ValueError("need at least one relay")
    if n_slots < 2:
        raise ValueError("cooperative schemes need n_slots >= 2")


def genie_instance(n_relays: int, n_slots: int) -> ExponentLp:
    """Outage region of the genie-aided SAF channel.

    ``M (1 - a_g0)^+ <= M r`` and ``(M - 1)(1 - a_gi)^+ <= M r`` for every
    relay; each relay-destination exponent has unit weight.
    """
    _check_slots(n_relays, n_slots)
    M = n_slots
    variables = [("a_g0", ONE)] + [(f"a_g{i}", ONE) for i in range(1, n_relays + 1)]
    region = [plus_constraint((M, one_minus("a_g0")))]
    region += [
        plus_constraint((M - 1, one_minus(f"a_g{i}"))) for i in range(1, n_relays + 1)
    ]
    return ExponentLp(f"genie(N={n_relays},M={M})", M, tuple(variables), (tuple(region),))


def _relay_vars(n_relays: int):
    # a_gh{i} stands for a_g{i} + a_h{i}; the product of two unit exponentials
    # has pdf exponent equal to the sum, hence unit weight.
    return [("a_g0", ONE)] + [(f"a_gh{i}", ONE) for i in range(1, n_relays + 1)]


def dumb_instance(n_relays: int, n_slots: int) -> ExponentLp:
    """Isolated-relay sequential SAF with round-robin (dumb) scheduling.

    With ``M - 1 = k N + m`` the relayed-path constraint is
    ``k sum_i (1 - a_ghi)^+ + sum_{i in S} (1 - a_ghi)^+ <= M r`` for every
    subset ``S`` of ``m`` relays.
    """
    _check_slots(n_relays, n_slots)
    N, M = n_relays, n_slots
    k, m = divmod(M - 1, N)
    region = [plus_constraint((M, one_minus("a_g0")))]
    for subset in itertools.combinations(range(1, N + 1), m):
        terms = []
        for i in range(1, N + 1):
            c = k + (1 if i in subset else 0)
            if c:
                terms.append((c, one_minus(f"a_gh{i}")))
        region.append(plus_constraint(*terms))
    return ExponentLp(f"dumb(N={N},M={M})", M, tuple(_relay_vars(N)), (tuple(region),))


def smart_instance(n_relays: int, n_slots: int) -> ExponentLp:
    """Isolated-relay sequential SAF alternating the two best relays.

    The best pair is the one with the largest relayed-path constraint value,
    so outage of the scheduled pair is equivalent to the two-relay
    round-robin constraint holding for every ordered pair of relays.
    """
    if n_relays < 2:
        raise ValueError("smart scheduling needs at least two relays")
    _check_slots(n_relays, n_slots)
    N, M = n_relays, n_slots
    k, m = divmod(M - 1, 2)
    region = [plus_constraint((M, one_minus("a_g0")))]
    seen = set()
    for first, second in itertools.permutations(range(1, N + 1), 2):
        key = (first, second) if m else tuple(sorted((first, second)))
        if key in seen:
            continue
        seen.add(key)
        coef = {first: k + m, second: k}
        terms = [
            (coef[i], one_minus(f"a_gh{i}"))
            for i in range(1, N + 1)
            if coef.get(i, 0)
        ]
        region.append(plus_constraint(*terms))
    if N == 2:
        # identical to the dumb construction; keep constraint order aligned
        region = list(dumb_instance(2, M).regions[0])
    return ExponentLp(f"smart(N={N},M={M})", M, tuple(_relay_vars(N)), (tuple(region),))


def two_relay_three_slot_instance(ordered: bool = True) -> ExponentLp:
    """Outage region of the two-relay three-slot sequential SAF channel.

    The inter-relay path keeps its gain, so the region involves the
    phase exponent ``a_theta`` (weight 1/2) and two constraints with a
    ``max{M r, phi}`` right-hand side.  With ``ordered`` the relay with the
    weaker source link transmits first (``a_h1 >= a_h2``).
    """
    half = Fraction(1, 2)
    names = ["a_g0", "a_g1", "a_g2", "a_h1", "a_h2", "a_gam"]
    variables = [(n, ONE) for n in names] + [("a_theta", half)]

    def lin(const, *neg):
        return Affine.of(const, {n: -1 for n in neg})

    phi = Affine.of(
        2,
        {
            "a_g0": -half,
            "a_g1": -half,
            "a_gam": -half,
            "a_h2": -half,
            "a_h1": -1,
            "a_g2": -1,
        },
    )
    region = [
        plus_constraint((3, one_minus("a_g0"))),
        plus_constraint((1, one_minus("a_g0")), (1, one_minus("a_g1", "a_h1"))),
        Constraint(lin(2, "a_g0", "a_g2", "a_h2")),
        Constraint(lin(1, "a_g2", "a_gam", "a_h1")),
        Constraint(lin(2, "a_g0", "a_g2", "a_gam", "a_h1", "a_theta")),
        Constraint(lin(2, "a_g1", "a_g2", "a_h1", "a_h2", "a_theta")),
        Constraint(lin(2, "a_g0", "a_g2", "a_gam", "a_h1"), phi=phi),
        Constraint(lin(2, "a_g1", "a_g2", "a_h1", "a_h2"), phi=phi),
    ]
    if ordered:
        region.append(Constraint(Affine.of(0, {"a_h2": 1, "a_h1": -1}), rate=False))
    label = "2r3s-ordered" if ordered else "2r3s-unordered"
    return ExponentLp(label, 3, tuple(variables), (tuple(region),))


def zero_instance(n_slots: int = 2) -> ExponentLp:
    """A region containing the origin for every ``r``: ``d == 0``."""
    return ExponentLp("zero", n_slots, (("a", ONE),), ((),))


def _parse_ints(args: str) -> list[int]:
    return [int(a) for a in args.split(",") if a.strip()]


INSTANCE_BUILDERS = {
    "genie": lambda n, m: genie_instance(n, m),
    "dumb": lambda n, m: dumb_instance(n, m),
    "smart": lambda n, m: smart_instance(n, m),
}


def instance_from_name(text: str) -> ExponentLp:
    """Parse ``genie:N,M``, ``dumb:N,M``, ``smart:N,M``, ``2r3s`` or
    ``2r3s-unordered``."""
    text = text.strip()
    if text in ("2r3s", "2r3s-ordered"):
        return two_relay_three_slot_instance(True)
    if text == "2r3s-unordered":
        return two_relay_three_slot_instance(False)
    kind, _, args = text.partition(":")
    if kind not in INSTANCE_BUILDERS:
        raise ValueError(f"unknown instance {text!r}")
    vals = _parse_ints(args)
    if len(vals) != 2:
        raise ValueError(f"instance {kind} needs N,M (got {args!r})")
    return INSTANCE_BUILDERS[kind](*vals)
