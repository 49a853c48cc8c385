"""Quasi-static Rayleigh relay networks and counter-based sampling.

Every realization is a pure function of ``(stats, seed, index)``: the
``index``-th sample reads a fixed window of the Philox stream keyed by
``seed``, so any partition of the index range into chunks or workers
yields the same gains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "LinkStats",
    "ChannelRealization",
    "SampleKey",
    "symmetric_network",
    "with_inter_relay_gain",
    "sample_realization",
    "sample_batch",
]

_U53 = 2.0 ** -53


@dataclass(frozen=True, eq=False)
class LinkStats:
    """Per-link variances of an N-relay network.

    ``var_rr[i, j]`` is the variance of the gain from relay ``i`` to relay
    ``j``; its diagonal must be zero.
    """

    n_relays: int
    var_sd: float
    var_sr: np.ndarray
    var_rd: np.ndarray
    var_rr: np.ndarray

    def __post_init__(self):
        n = self.n_relays
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ConfigError("n_relays must be a positive integer")
        object.__setattr__(self, "var_sr", np.asarray(self.var_sr, dtype=float).reshape(-1))
        object.__setattr__(self, "var_rd", np.asarray(self.var_rd, dtype=float).reshape(-1))
        object.__setattr__(self, "var_rr", np.asarray(self.var_rr, dtype=float))
        object.__setattr__(self, "var_sd", float(self.var_sd))
        if self.var_sr.shape != (n,) or self.var_rd.shape != (n,):
            raise ConfigError("var_sr and var_rd need one entry per relay")
        if self.var_rr.shape != (n, n):
            raise ConfigError("var_rr must be n_relays x n_relays")
        arrays = (np.array([self.var_sd]), self.var_sr, self.var_rd, self.var_rr)
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ConfigError("variances must be finite")
        if any(np.any(a < 0) for a in arrays):
            raise ConfigError("variances must be non-negative")
        if np.any(np.diag(self.var_rr) != 0):
            raise ConfigError("var_rr must have a zero diagonal")
        if not np.array_equal(self.var_rr, self.var_rr.T):
            raise ConfigError("var_rr must be symmetric")

    def to_dict(self) -> dict:
        return {
            "n_relays": int(self.n_relays),
            "var_sd": self.var_sd,
            "var_sr": self.var_sr.tolist(),
            "var_rd": self.var_rd.tolist(),
            "var_rr": self.var_rr.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinkStats":
        if "symmetric" in d:
            sym = d["symmetric"]
            stats = symmetric_network(int(sym["n_relays"]), float(sym.get("variance", 1.0)))
        else:
            try:
                stats = cls(int(d["n_relays"]), d["var_sd"], d["var_sr"], d["var_rd"], d["var_rr"])
            except KeyError as exc:
                raise ConfigError(f"link stats missing field {exc}") from None
        if "inter_relay_gain_db" in d:
            stats = with_inter_relay_gain(stats, float(d["inter_relay_gain_db"]))
        return stats


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Complex link gains of one network draw, or of a batch of draws.

    Arrays may carry leading batch dimensions: ``g0`` has shape ``B``,
    ``h`` and ``g`` have ``B + (N,)`` and ``gamma`` has ``B + (N, N)``.
    """

    g0: np.ndarray
    h: np.ndarray
    g: np.ndarray
    gamma: np.ndarray

    @property
    def n_relays(self) -> int:
        return self.h.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return np.shape(self.g0)

    def __getitem__(self, idx) -> "ChannelRealization":
        return ChannelRealization(self.g0[idx], self.h[idx], self.g[idx], self.gamma[idx])


@dataclass(frozen=True)
class SampleKey:
    seed: int
    index: int = field(default=0)

    def __post_init__(self):
        for v in (self.seed, self.index):
            if not 0 <= int(v) < 2 ** 64:
                raise ConfigError("seed and index must be 64-bit unsigned integers")


def symmetric_network(n_relays: int, variance: float = 1.0) -> LinkStats:
    """Every link (including relay-relay) with the same variance."""
    if not variance > 0:
        raise ConfigError("variance must be positive")
    n = int(n_relays)
    rr = np.full((n, n), float(variance))
    np.fill_diagonal(rr, 0.0)
    return LinkStats(n, variance, np.full(n, float(variance)), np.full(n, float(variance)), rr)


def with_inter_relay_gain(stats: LinkStats, gain_db: float) -> LinkStats:
    """Rescale relay-relay variances to a geometric gain over source-relay links.

    The gain is ``E|gamma_ij|^2 / E|h_j|^2``.  For unequal source-relay
    variances the pairwise reference is the geometric mean of the two
    relays' variances, which keeps ``var_rr`` symmetric.
    """
    ratio = 10.0 ** (gain_db / 10.0)
    ref = np.sqrt(np.outer(stats.var_sr, stats.var_sr))
    rr = ratio * ref
    np.fill_diagonal(rr, 0.0)
    return LinkStats(stats.n_relays, stats.var_sd, stats.var_sr.copy(), stats.var_rd.copy(), rr)


def _draws_per_sample(n_relays: int) -> int:
    # g0, h, g and the full gamma matrix (diagonal slots are discarded)
    return 1 + 2 * n_relays + n_relays * n_relays


def _blocks_per_sample(n_relays: int) -> int:
    # two 64-bit words per complex draw, four words per Philox block
    return -(-2 * _draws_per_sample(n_relays) // 4)


def _unit_complex_normals(seed: int, start: int, count: int, n_draws: int, blocks: int) -> np.ndarray:
    """``count x n_draws`` circular Gaussians with ``E|z|^2 = 1``."""
    bitgen = np.random.Philox(key=int(seed), counter=int(start) * blocks)
    raw = bitgen.random_raw(count * blocks * 4).reshape(count, blocks * 4)[:, : 2 * n_draws]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _U53
    u1 = u[:, 0::2]
    u2 = u[:, 1::2]
    # Box-Muller: |z|^2 = -log(u1) is unit exponential
    radius = np.sqrt(-np.log(u1))
    angle = (2.0 * np.pi) * u2
    return radius * (np.cos(angle) + 1j * np.sin(angle))


def sample_batch(stats: LinkStats, seed: int, start: int, count: int) -> ChannelRealization:
    """Realizations for indices ``start, ..., start + count - 1``."""
    if count < 0 or start < 0:
        raise ConfigError("start and count must be non-negative")
    n = stats.n_relays
    z = _unit_complex_normals(seed, start, count, _draws_per_sample(n), _blocks_per_sample(n))
    g0 = np.sqrt(stats.var_sd) * z[:, 0]
    h = np.sqrt(stats.var_sr) * z[:, 1 : 1 + n]
    g = np.sqrt(stats.var_rd) * z[:, 1 + n : 1 + 2 * n]
    gamma = np.sqrt(stats.var_rr) * z[:, 1 + 2 * n :].reshape(count, n, n)
    return ChannelRealization(g0, h, g, gamma)


def sample_realization(stats: LinkStats, key: SampleKey) -> ChannelRealization:
    """The single realization addressed by ``key``."""
    return sample_batch(stats, key.seed, key.index, 1)[0]
