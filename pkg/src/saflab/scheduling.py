"""Relay cost functions and effective-relay schedules.

Schedules map the ``M - 1`` effective relays of a sequential SAF frame to
physical relays.  The public :class:`Schedule` uses relay labels ``1..N``;
the ``*_sequences`` helpers work on batches and return 0-based indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError

__all__ = [
    "Schedule",
    "POLICIES",
    "cost_function",
    "relay_costs",
    "dumb_schedule",
    "smart_schedule",
    "ordered_2r3s_schedule",
    "fixed_schedule",
    "dumb_sequences",
    "smart_sequences",
    "ordered_2r3s_sequences",
    "schedule_sequences",
]

POLICIES = ("dumb", "smart", "ordered2r3s", "fixed")


@dataclass(frozen=True)
class Schedule:
    sequence: tuple[int, ...]
    policy: str

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown scheduling policy {self.policy!r}")
        if any(i < 1 for i in self.sequence):
            raise ConfigError("relay labels start at 1")

    @property
    def n_slots(self) -> int:
        return len(self.sequence) + 1

    def indices(self) -> np.ndarray:
        """0-based relay indices."""
        return np.asarray(self.sequence, dtype=np.intp) - 1

    def validate(self, n_relays: int) -> None:
        if any(i > n_relays for i in self.sequence):
            raise ConfigError(f"schedule {self.sequence} names a relay beyond N={n_relays}")
        if n_relays >= 2 and any(a == b for a, b in zip(self.sequence, self.sequence[1:])):
            raise ConfigError("a relay cannot forward two consecutive slots")


def cost_function(snr, bg_sq, bgh_sq):
    """Effective SNR of the relayed path, ``snr^2 |bgh|^2 / (1 + snr |bg|^2)``."""
    return snr * snr * bgh_sq / (1.0 + snr * bg_sq)


def relay_costs(h: np.ndarray, g: np.ndarray, snr: float) -> np.ndarray:
    """Costs of every relay with the two-slot normalization
    ``|b_i|^2 = 1 / (1 + snr |h_i|^2)``."""
    h2 = np.abs(h) ** 2
    b2 = 1.0 / (1.0 + snr * h2)
    bg2 = b2 * np.abs(g) ** 2
    return cost_function(snr, bg2, bg2 * h2)


def _descending(costs: np.ndarray) -> np.ndarray:
    # stable sort on the negated costs keeps ties in ascending index order
    return np.argsort(-np.asarray(costs, dtype=float), axis=-1, kind="stable")


def dumb_sequences(costs: np.ndarray, n_slots: int) -> np.ndarray:
    """Round-robin over relays sorted by decreasing cost."""
    costs = np.asarray(costs, dtype=float)
    n = costs.shape[-1]
    if n_slots < 2:
        raise ConfigError("sequential SAF needs n_slots >= 2")
    if n == 1 and n_slots > 2:
        raise ConfigError("one relay cannot serve more than one effective relay")
    order = _descending(costs)
    pos = np.arange(n_slots - 1) % n
    return order[..., pos]


def smart_sequences(costs: np.ndarray, n_slots: int) -> np.ndarray:
    """Alternate the two highest-cost relays, best first."""
    costs = np.asarray(costs, dtype=float)
    if costs.shape[-1] < 2:
        raise ConfigError("smart scheduling needs at least two relays")
    if n_slots < 2:
        raise ConfigError("sequential SAF needs n_slots >= 2")
    best2 = _descending(costs)[..., :2]
    return best2[..., np.arange(n_slots - 1) % 2]


def ordered_2r3s_sequences(h: np.ndarray) -> np.ndarray:
    """Two relays, three slots: the weaker source-relay link goes first."""
    h = np.asarray(h)
    if h.shape[-1] != 2:
        raise ConfigError("the ordered two-relay schedule needs exactly two relays")
    h2 = np.abs(h) ** 2
    swap = h2[..., 0] > h2[..., 1]
    first = swap.astype(np.intp)
    return np.stack([first, 1 - first], axis=-1)


def schedule_sequences(
    policy: str,
    n_slots: int,
    h: np.ndarray,
    g: np.ndarray,
    snr: float,
    fixed: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """Batched 0-based schedules for ``policy`` given the relay gains."""
    n = h.shape[-1]
    batch = h.shape[:-1]
    if policy == "fixed":
        if fixed is None:
            raise ConfigError("the fixed policy needs a sequence")
        sched = Schedule(tuple(int(i) for i in fixed), "fixed")
        if sched.n_slots != n_slots:
            raise ConfigError("fixed sequence length must be n_slots - 1")
        sched.validate(n)
        return np.broadcast_to(sched.indices(), batch + (n_slots - 1,))
    if policy == "ordered2r3s":
        if n_slots != 3:
            raise ConfigError("the ordered two-relay schedule needs n_slots = 3")
        return ordered_2r3s_sequences(h)
    costs = relay_costs(h, g, snr)
    if policy == "dumb":
        return dumb_sequences(costs, n_slots)
    if policy == "smart":
        return smart_sequences(costs, n_slots)
    raise ConfigError(f"unknown scheduling policy {policy!r}")


def _as_schedule(seq: np.ndarray, policy: str) -> Schedule:
    return Schedule(tuple(int(i) + 1 for i in seq), policy)


def dumb_schedule(costs: Sequence[float], n_slots: int) -> Schedule:
    return _as_schedule(dumb_sequences(np.asarray(costs, dtype=float), n_slots), "dumb")


def smart_schedule(costs: Sequence[float], n_slots: int) -> Schedule:
    return _as_schedule(smart_sequences(np.asarray(costs, dtype=float), n_slots), "smart")


def ordered_2r3s_schedule(h: Sequence[complex]) -> Schedule:
    return _as_schedule(ordered_2r3s_sequences(np.asarray(h)), "ordered2r3s")


def fixed_schedule(sequence: Sequence[int]) -> Schedule:
    return Schedule(tuple(int(i) for i in sequence), "fixed")
