"""Equivalent linear channels ``y = sqrt(snr) H x + z`` of the relaying schemes.

Builders accept a :class:`~saflab.channel.ChannelRealization` whose arrays
may carry leading batch dimensions and return an :class:`EquivalentChannel`
with matching batch shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelRealization
from .errors import ConfigError
from .scheduling import POLICIES, Schedule, relay_costs, schedule_sequences

__all__ = [
    "PowerAllocation",
    "EquivalentChannel",
    "SchemeSpec",
    "default_allocation",
    "naf_allocation",
    "relay_amp_gains",
    "build_noncoop",
    "build_sequential_saf",
    "build_naf",
    "build_relay_selection_naf",
    "build_genie_aided",
    "build_channel",
]

KINDS = ("noncoop", "naf", "relay_selection_naf", "sequential_saf", "genie")


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Source (``pi``) and relay (``pibar``) power factors per slot."""

    pi: np.ndarray
    pibar: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float).reshape(-1)
        pibar = np.asarray(self.pibar, dtype=float).reshape(-1)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "pibar", pibar)
        if pi.shape != pibar.shape or pi.size == 0:
            raise ConfigError("pi and pibar need the same non-zero length")
        if np.any(pi < 0) or np.any(pibar < 0):
            raise ConfigError("power factors must be non-negative")
        if pibar[0] != 0:
            raise ConfigError("no relay can transmit in the first slot (pibar[0] = 0)")
        if abs(pi.sum() + pibar.sum() - pi.size) > 1e-12:
            raise ConfigError("power factors must sum to the number of slots")

    @property
    def n_slots(self) -> int:
        return self.pi.size

    def to_dict(self) -> dict:
        return {"pi": self.pi.tolist(), "pibar": self.pibar.tolist()}


def default_allocation(n_slots: int) -> PowerAllocation:
    """``pi_1 = 1`` and ``pi_i = pibar_i = 1/2`` for the later slots."""
    pi = np.full(n_slots, 0.5)
    pibar = np.full(n_slots, 0.5)
    pi[0], pibar[0] = 1.0, 0.0
    return PowerAllocation(pi, pibar)


def naf_allocation(n_relays: int) -> PowerAllocation:
    """Listening slots carry the source alone; forwarding slots split 1/2-1/2."""
    pi = np.tile([1.0, 0.5], n_relays)
    pibar = np.tile([0.0, 0.5], n_relays)
    return PowerAllocation(pi, pibar)


@dataclass(frozen=True, eq=False)
class EquivalentChannel:
    """Channel matrix ``H`` and noise covariance ``Sigma = I + Sigma_e``."""

    h_matrix: np.ndarray
    noise_cov: np.ndarray

    @property
    def n_slots(self) -> int:
        return self.h_matrix.shape[-1]


@dataclass(frozen=True, eq=False)
class SchemeSpec:
    """Description of one cooperative scheme.

    ``kind`` is one of ``noncoop``, ``naf``, ``relay_selection_naf``,
    ``sequential_saf`` or ``genie``.  ``n_slots`` is implied for the first
    three kinds.  ``scheduling`` and ``relay_isolation`` apply to the
    sequential kind only; ``allocation`` defaults per kind.
    """

    kind: str
    n_slots: int = 0
    n_relays: int = 0
    scheduling: str = "dumb"
    relay_isolation: bool = False
    fixed_sequence: Optional[tuple[int, ...]] = None
    allocation: Optional[PowerAllocation] = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scheme kind {self.kind!r}")
        M = self.n_slots
        if self.kind == "noncoop":
            M = 1
        elif self.kind == "naf":
            if self.n_relays < 1:
                raise ConfigError("NAF needs n_relays >= 1")
            if M not in (0, 2 * self.n_relays):
                raise ConfigError("NAF uses n_slots = 2 * n_relays")
            M = 2 * self.n_relays
        elif self.kind == "relay_selection_naf":
            M = 2
        elif M < 2:
            raise ConfigError(
                "cooperative schemes need n_slots >= 2 (use noncoop for a single slot)"
            )
        object.__setattr__(self, "n_slots", M)
        if self.scheduling not in POLICIES:
            raise ConfigError(f"unknown scheduling policy {self.scheduling!r}")
        if self.fixed_sequence is not None:
            object.__setattr__(self, "fixed_sequence", tuple(int(i) for i in self.fixed_sequence))
        if self.allocation is not None and self.allocation.n_slots != M:
            raise ConfigError("allocation length must equal n_slots")
        if not self.label:
            object.__setattr__(self, "label", self._default_label())

    def _default_label(self) -> str:
        if self.kind == "noncoop":
            return "noncoop"
        if self.kind == "naf":
            return f"naf_N{self.n_relays}"
        if self.kind == "relay_selection_naf":
            return "selection_naf"
        if self.kind == "genie":
            return f"genie_M{self.n_slots}"
        iso = "_iso" if self.relay_isolation else ""
        return f"saf_M{self.n_slots}_{self.scheduling}{iso}"

    @property
    def power(self) -> PowerAllocation:
        if self.allocation is not None:
            return self.allocation
        if self.kind == "naf":
            return naf_allocation(self.n_relays)
        if self.n_slots == 1:
            return PowerAllocation([1.0], [0.0])
        return default_allocation(self.n_slots)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "label": self.label}
        if self.kind in ("sequential_saf", "genie"):
            d["n_slots"] = self.n_slots
        if self.kind == "naf":
            d["n_relays"] = self.n_relays
        if self.kind == "sequential_saf":
            d["scheduling"] = self.scheduling
            d["relay_isolation"] = self.relay_isolation
            if self.fixed_sequence is not None:
                d["fixed_sequence"] = list(self.fixed_sequence)
        if self.allocation is not None:
            d["allocation"] = self.allocation.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SchemeSpec":
        d = dict(d)
        alloc = d.pop("allocation", None)
        known = {"kind", "n_slots", "n_relays", "scheduling", "relay_isolation", "fixed_sequence", "label"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown scheme fields {sorted(unknown)}")
        if "kind" not in d:
            raise ConfigError("scheme needs a kind")
        if alloc is not None:
            alloc = PowerAllocation(alloc["pi"], alloc["pibar"])
        return cls(allocation=alloc, **d)


def _eye(batch: tuple, m: int) -> np.ndarray:
    return np.broadcast_to(np.eye(m, dtype=complex), batch + (m, m)).copy()


def _effective_gains(real: ChannelRealization, seq: np.ndarray, isolated: bool):
    """Gains of the effective relays along ``seq`` (0-based, shape B+(M-1,))."""
    h_eff = np.take_along_axis(real.h, seq, axis=-1)
    g_eff = np.take_along_axis(real.g, seq, axis=-1)
    gam = np.zeros(h_eff.shape, dtype=complex)
    if not isolated and seq.shape[-1] > 1:
        prev, cur = seq[..., :-1], seq[..., 1:]
        rows = np.take_along_axis(real.gamma, prev[..., None], axis=-2)
        gam[..., 1:] = np.take_along_axis(rows, cur[..., None], axis=-1)[..., 0]
    return h_eff, g_eff, gam


def _amp_gains(h_eff, gam, alloc: PowerAllocation, snr: float) -> np.ndarray:
    n_eff = h_eff.shape[-1]
    b = np.empty(h_eff.shape, dtype=float)
    prev = np.zeros(h_eff.shape[:-1])  # b_0^2 P_0 (no predecessor)
    for i in range(n_eff):
        p = (
            1.0
            + alloc.pi[i] * snr * np.abs(h_eff[..., i]) ** 2
            + alloc.pibar[i] * snr * np.abs(gam[..., i]) ** 2 * prev
        )
        b[..., i] = 1.0 / np.sqrt(p)
        prev = b[..., i] ** 2 * p
    return b


def relay_amp_gains(
    realization: ChannelRealization,
    allocation: PowerAllocation,
    snr: float,
    schedule,
    relay_isolation: bool = False,
) -> np.ndarray:
    """Processing gains ``b_i`` normalising each effective relay's received
    power to one, conditioned on the channel gains.

    ``schedule`` is a :class:`Schedule` or an array of 0-based indices.
    """
    seq = _schedule_array(schedule, realization)
    h_eff, _, gam = _effective_gains(realization, seq, relay_isolation)
    return _amp_gains(h_eff, gam, allocation, snr)


def _schedule_array(schedule, real: ChannelRealization) -> np.ndarray:
    if isinstance(schedule, Schedule):
        schedule.validate(real.n_relays)
        seq = schedule.indices()
    else:
        seq = np.asarray(schedule, dtype=np.intp)
    return np.broadcast_to(seq, real.batch_shape + seq.shape[-1:])


def build_noncoop(realization: ChannelRealization, snr: float = 1.0) -> EquivalentChannel:
    g0 = np.asarray(realization.g0, dtype=complex)
    h = g0[..., None, None]
    return EquivalentChannel(h.copy(), np.ones_like(h))


def build_sequential_saf(
    realization: ChannelRealization, spec: SchemeSpec, snr: float, schedule
) -> EquivalentChannel:
    """``H = (g0 I + T diag(h)) diag(a)`` and ``Sigma = I + T T^H`` with
    ``T = U_c (I - U_d)^-1`` along the scheduled effective relays."""
    if spec.kind != "sequential_saf":
        raise ConfigError("build_sequential_saf needs a sequential_saf spec")
    M = spec.n_slots
    seq = _schedule_array(schedule, realization)
    if seq.shape[-1] != M - 1:
        raise ConfigError(f"schedule length {seq.shape[-1]} does not match n_slots - 1 = {M - 1}")
    if np.any(seq < 0) or np.any(seq >= realization.n_relays):
        raise ConfigError("schedule names a relay outside the network")
    alloc = spec.power
    h_eff, g_eff, gam = _effective_gains(realization, seq, spec.relay_isolation)
    b = _amp_gains(h_eff, gam, alloc, snr)
    scale = np.sqrt(alloc.pibar[1:] * snr) * b
    c = scale * g_eff
    d = scale * gam_next(gam)

    batch = realization.batch_shape
    # W = (I - U_d)^-1 is unit lower triangular with W[i, j] = d_j ... d_{i-1}
    W = _eye(batch, M - 1)
    for i in range(1, M - 1):
        W[..., i, :i] = W[..., i - 1, :i] * d[..., i - 1, None]
    T = np.zeros(batch + (M, M), dtype=complex)
    T[..., 1:, : M - 1] = c[..., :, None] * W

    a = np.sqrt(alloc.pi)
    g0 = np.asarray(realization.g0, dtype=complex)
    H = np.zeros(batch + (M, M), dtype=complex)
    H[..., :, : M - 1] = T[..., :, : M - 1] * (h_eff * a[: M - 1])[..., None, :]
    diag = np.arange(M)
    H[..., diag, diag] += g0[..., None] * a
    # T has a zero first row and last column
    blk = T[..., 1:, : M - 1]
    sigma = _eye(batch, M)
    sigma[..., 1:, 1:] += blk @ np.conj(np.swapaxes(blk, -1, -2))
    return EquivalentChannel(H, sigma)


def gam_next(gam: np.ndarray) -> np.ndarray:
    """Map ``gam[i] = gamma_{i-1,i}`` to ``gamma_{i,i+1}`` (zero past the end)."""
    out = np.zeros_like(gam)
    out[..., :-1] = gam[..., 1:]
    return out


def build_naf(realization: ChannelRealization, spec: SchemeSpec, snr: float) -> EquivalentChannel:
    """Block-diagonal NAF channel: relay i listens in slot 2i-1 and forwards
    in slot 2i while the source keeps transmitting."""
    if spec.kind != "naf":
        raise ConfigError("build_naf needs a naf spec")
    N = spec.n_relays
    if realization.n_relays != N:
        raise ConfigError(f"spec has {N} relays, realization has {realization.n_relays}")
    alloc = spec.power
    batch = realization.batch_shape
    M = 2 * N
    H = np.zeros(batch + (M, M), dtype=complex)
    sigma = _eye(batch, M)
    g0 = np.asarray(realization.g0, dtype=complex)
    for i in range(N):
        p1, p2, pb = alloc.pi[2 * i], alloc.pi[2 * i + 1], alloc.pibar[2 * i + 1]
        hi = realization.h[..., i]
        gi = realization.g[..., i]
        bi = 1.0 / np.sqrt(1.0 + p1 * snr * np.abs(hi) ** 2)
        s, t = 2 * i, 2 * i + 1
        H[..., s, s] = np.sqrt(p1) * g0
        H[..., t, s] = np.sqrt(pb * snr) * bi * gi * np.sqrt(p1) * hi
        H[..., t, t] = np.sqrt(p2) * g0
        sigma[..., t, t] = 1.0 + pb * snr * np.abs(bi * gi) ** 2
    return EquivalentChannel(H, sigma)


def build_relay_selection_naf(
    realization: ChannelRealization, spec: SchemeSpec, snr: float
) -> EquivalentChannel:
    """Two-slot sequential SAF through the relay with the largest cost."""
    best = np.argmax(relay_costs(realization.h, realization.g, snr), axis=-1)
    two_slot = SchemeSpec(
        "sequential_saf", n_slots=2, relay_isolation=True, allocation=spec.allocation
    )
    return build_sequential_saf(realization, two_slot, snr, best[..., None])


def build_genie_aided(
    realization: ChannelRealization, spec: SchemeSpec, snr: float = 1.0
) -> EquivalentChannel:
    """``H = g0 I`` plus ``g_max`` on the first sub-diagonal, ``Sigma = I``.

    The genie relay forwards the clean previous slot at unit power, so no
    power factor or SNR scaling enters the sub-diagonal.
    """
    M = spec.n_slots
    if M < 2:
        raise ConfigError("genie-aided scheme needs n_slots >= 2")
    best = np.argmax(np.abs(realization.g), axis=-1)
    g_max = np.take_along_axis(realization.g, best[..., None], axis=-1)[..., 0]
    batch = realization.batch_shape
    g0 = np.asarray(realization.g0, dtype=complex)
    H = g0[..., None, None] * np.eye(M)
    idx = np.arange(1, M)
    H[..., idx, idx - 1] = g_max[..., None]
    return EquivalentChannel(H, _eye(batch, M))


def build_channel(
    spec: SchemeSpec, realization: ChannelRealization, snr: float
) -> EquivalentChannel:
    """Full per-sample pipeline: schedule (if needed) and build."""
    kind = spec.kind
    if kind == "noncoop":
        return build_noncoop(realization, snr)
    if kind == "naf":
        return build_naf(realization, spec, snr)
    if kind == "relay_selection_naf":
        return build_relay_selection_naf(realization, spec, snr)
    if kind == "genie":
        return build_genie_aided(realization, spec, snr)
    seq = schedule_sequences(
        spec.scheduling, spec.n_slots, realization.h, realization.g, snr, spec.fixed_sequence
    )
    return build_sequential_saf(realization, spec, snr, seq)
