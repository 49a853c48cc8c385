"""Exact diversity-multiplexing tradeoff computations."""

from .curves import (
    DmtCurve,
    dmt_curve_from_lp,
    miso_bound,
    naf_dmt,
    noncoop_dmt,
    saf_upper_bound,
)
from .exponent import Affine, Constraint, ExponentLp, one_minus, solve_exponent_lp
from .instances import (
    dumb_instance,
    genie_instance,
    instance_from_name,
    smart_instance,
    two_relay_three_slot_instance,
    zero_instance,
)

__all__ = [
    "Affine",
    "Constraint",
    "DmtCurve",
    "ExponentLp",
    "dmt_curve_from_lp",
    "dumb_instance",
    "genie_instance",
    "instance_from_name",
    "miso_bound",
    "naf_dmt",
    "noncoop_dmt",
    "one_minus",
    "saf_upper_bound",
    "smart_instance",
    "solve_exponent_lp",
    "two_relay_three_slot_instance",
    "zero_instance",
]
