"""Mutual information, Monte-Carlo outage estimation and curve diagnostics."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import LinkStats, sample_batch
from .errors import ConfigError, DiagnosticError
from .schemes import EquivalentChannel, SchemeSpec, build_channel

__all__ = [
    "OutageEstimate",
    "OutageCurve",
    "mutual_information",
    "estimate_outage",
    "outage_counts",
    "outage_curves",
    "diversity_slope",
    "power_gain_at",
    "snr_at",
    "WORKERS_ENV",
    "CHUNK",
]

log = logging.getLogger(__name__)

WORKERS_ENV = "SAFLAB_WORKERS"
# Fixed chunk size; results never depend on it, only memory use does.
CHUNK = 1 << 12


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    stderr: float
    n_samples: int
    snr_db: float
    rate_bpcu: float

    @classmethod
    def from_count(cls, count: int, n: int, snr_db: float, rate: float) -> "OutageEstimate":
        p = count / n
        return cls(p, math.sqrt(p * (1.0 - p) / n), n, float(snr_db), float(rate))


@dataclass(frozen=True)
class OutageCurve:
    """Outage estimates over ascending SNR at one fixed rate."""

    points: tuple[OutageEstimate, ...]
    label: str = ""

    def __post_init__(self):
        snrs = [p.snr_db for p in self.points]
        if any(b <= a for a, b in zip(snrs, snrs[1:])):
            raise ValueError("snr_db must be strictly increasing")

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def p_hat(self) -> np.ndarray:
        return np.array([p.p_hat for p in self.points])

    @property
    def rate_bpcu(self) -> float:
        return self.points[0].rate_bpcu if self.points else float("nan")

    @classmethod
    def from_arrays(cls, snr_db, p, label: str = "", rate: float = 0.0, n: int = 0) -> "OutageCurve":
        """Curve from plain arrays (analytic or synthetic inputs)."""
        pts = []
        for s, q in zip(snr_db, p):
            se = math.sqrt(q * (1 - q) / n) if n else 0.0
            pts.append(OutageEstimate(float(q), se, n, float(s), rate))
        return cls(tuple(pts), label)


def _logdet_pd(a: np.ndarray) -> np.ndarray:
    # Hermitian positive-definite: log det = 2 sum log diag(chol)
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        sign, ld = np.linalg.slogdet(a)
        if np.any(sign.real <= 0):
            raise
        return ld
    return 2.0 * np.log(np.diagonal(L, axis1=-2, axis2=-1).real).sum(axis=-1)


def mutual_information(eqch: EquivalentChannel, snr: float) -> np.ndarray:
    """``(1/M) log2 det(I + snr Sigma^-1 H H^H)`` in bits per channel use.

    Evaluated as ``log det(Sigma + snr H H^H) - log det(Sigma)``; works on
    batches of channels.
    """
    H = eqch.h_matrix
    S = eqch.noise_cov
    M = H.shape[-1]
    A = S + snr * (H @ np.conj(np.swapaxes(H, -1, -2)))
    mi = (_logdet_pd(A) - _logdet_pd(S)) / (M * math.log(2.0))
    return np.maximum(mi, 0.0)


def _snr_lin(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def _chunk_counts(args) -> np.ndarray:
    scheme, stats, snr_db, rates, seed, start, count = args
    real = sample_batch(stats, seed, start, count)
    rates = np.asarray(rates, dtype=float)
    out = np.zeros((len(snr_db), len(rates)), dtype=np.int64)
    for i, s in enumerate(snr_db):
        snr = _snr_lin(s)
        mi = mutual_information(build_channel(scheme, real, snr), snr)
        out[i] = (mi[:, None] < rates[None, :]).sum(axis=0)
    return out


def _resolve_workers(workers: Optional[int]) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV, "")
        try:
            workers = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return max(1, int(workers))


def _check_scheme(scheme: SchemeSpec, stats: LinkStats) -> None:
    N = stats.n_relays
    if scheme.kind == "naf" and scheme.n_relays != N:
        raise ConfigError(f"{scheme.label}: NAF relay count {scheme.n_relays} != network size {N}")
    if scheme.kind == "sequential_saf":
        pol = scheme.scheduling
        if pol == "dumb" and N == 1 and scheme.n_slots > 2:
            raise ConfigError(f"{scheme.label}: one relay supports only n_slots = 2")
        if pol == "smart" and N < 2:
            raise ConfigError(f"{scheme.label}: smart scheduling needs two relays")
        if pol == "ordered2r3s" and (N != 2 or scheme.n_slots != 3):
            raise ConfigError(f"{scheme.label}: ordered two-relay schedule needs N = 2, M = 3")
        if pol == "fixed" and scheme.fixed_sequence is None:
            raise ConfigError(f"{scheme.label}: fixed policy needs fixed_sequence")


def outage_counts(
    scheme: SchemeSpec,
    stats: LinkStats,
    snr_db: Sequence[float],
    rates_bpcu: Sequence[float],
    n_samples: int,
    seed: int,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Integer outage counts, shape ``(len(snr_db), len(rates_bpcu))``.

    The same realizations (indices ``0..n_samples-1``) are reused at every
    SNR.  Counts are bit-identical for any ``workers``.
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be >= 1")
    _check_scheme(scheme, stats)
    snr_db = [float(s) for s in snr_db]
    rates = [float(r) for r in rates_bpcu]
    jobs = [
        (scheme, stats, snr_db, rates, seed, start, min(CHUNK, n_samples - start))
        for start in range(0, n_samples, CHUNK)
    ]
    total = np.zeros((len(snr_db), len(rates)), dtype=np.int64)
    w = _resolve_workers(workers)
    if w == 1 or len(jobs) == 1:
        for job in jobs:
            total += _chunk_counts(job)
    else:
        with ProcessPoolExecutor(max_workers=w) as pool:
            for part in pool.map(_chunk_counts, jobs):
                total += part
    return total


def outage_curves(
    scheme: SchemeSpec,
    stats: LinkStats,
    snr_db: Sequence[float],
    rates_bpcu: Sequence[float],
    n_samples: int,
    seed: int,
    workers: Optional[int] = None,
) -> list[OutageCurve]:
    """One :class:`OutageCurve` per rate."""
    counts = outage_counts(scheme, stats, snr_db, rates_bpcu, n_samples, seed, workers)
    curves = []
    for j, rate in enumerate(rates_bpcu):
        pts = tuple(
            OutageEstimate.from_count(int(counts[i, j]), n_samples, s, rate)
            for i, s in enumerate(snr_db)
        )
        curves.append(OutageCurve(pts, scheme.label))
    return curves


def estimate_outage(
    scheme: SchemeSpec,
    stats: LinkStats,
    snr_db: float,
    rate_bpcu: float,
    n_samples: int,
    seed: int,
    workers: Optional[int] = None,
) -> OutageEstimate:
    """Fraction of realizations whose mutual information is below the rate."""
    c = outage_counts(scheme, stats, [snr_db], [rate_bpcu], n_samples, seed, workers)
    return OutageEstimate.from_count(int(c[0, 0]), n_samples, snr_db, rate_bpcu)


def diversity_slope(curve: OutageCurve, snr_window_db: tuple[float, float]) -> float:
    """Least-squares slope of ``-log10 p`` against ``snr_db / 10``.

    Only points inside the window with ``0 < p <= 0.1`` enter the fit.
    """
    lo, hi = snr_window_db
    s = curve.snr_db
    p = curve.p_hat
    keep = (s >= lo) & (s <= hi) & (p > 0) & (p <= 0.1)
    if keep.sum() < 2:
        raise DiagnosticError(
            f"need >= 2 points with 0 < p <= 0.1 inside {lo}-{hi} dB, found {int(keep.sum())}"
        )
    slope, _ = np.polyfit(s[keep] / 10.0, -np.log10(p[keep]), 1)
    return float(slope)


def snr_at(target_pout: float, curve: OutageCurve) -> float:
    """SNR (dB) where the curve first falls to ``target_pout``.

    Interpolates ``log10 p`` linearly in dB between the bracketing points.
    """
    s = curve.snr_db
    p = curve.p_hat
    lt = math.log10(target_pout)
    for i in range(len(s) - 1):
        p0, p1 = p[i], p[i + 1]
        if p0 >= target_pout >= p1 and p0 > 0:
            if p0 == target_pout:
                return float(s[i])
            if p1 <= 0:
                break
            l0, l1 = math.log10(p0), math.log10(p1)
            if l0 == l1:
                return float(s[i])
            return float(s[i] + (lt - l0) * (s[i + 1] - s[i]) / (l1 - l0))
    if len(p) and p[-1] == target_pout:
        return float(s[-1])
    raise DiagnosticError(
        f"curve {curve.label!r} does not cross p = {target_pout:g} within "
        f"{s.min() if len(s) else 'n/a'}-{s.max() if len(s) else 'n/a'} dB"
    )


def power_gain_at(target_pout: float, curve_a: OutageCurve, curve_b: OutageCurve) -> float:
    """SNR advantage of ``curve_a`` over ``curve_b`` at the target outage:
    ``SNR_b(target) - SNR_a(target)`` in dB."""
    return snr_at(target_pout, curve_b) - snr_at(target_pout, curve_a)


def warn_sample_count(target_pout: float, n_samples: int, rel_err: float = 0.03) -> Optional[str]:
    """Warning text when ``n_samples`` is too small for ``rel_err`` at the target."""
    need = (1.0 - target_pout) / (target_pout * rel_err * rel_err)
    if n_samples < need:
        msg = (
            f"n_samples={n_samples} gives > {rel_err:.0%} relative error at p={target_pout:g} "
            f"(need about {math.ceil(need):d})"
        )
        log.warning(msg)
        return msg
    return None
