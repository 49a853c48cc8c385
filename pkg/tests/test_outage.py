import math

import numpy as np
import pytest

import saflab.outage as outage
from saflab.channel import LinkStats, symmetric_network
from saflab.errors import ConfigError, DiagnosticError
from saflab.outage import (
    OutageCurve,
    OutageEstimate,
    diversity_slope,
    estimate_outage,
    mutual_information,
    outage_counts,
    outage_curves,
    power_gain_at,
    snr_at,
    warn_sample_count,
)
from saflab.schemes import EquivalentChannel, SchemeSpec

from _oracles import mi_eigen, rayleigh_outage

NONCOOP = SchemeSpec("noncoop")
SAF3 = SchemeSpec("sequential_saf", n_slots=3)


def test_mi_examples():
    e = EquivalentChannel(np.array([[1.0 + 0j]]), np.eye(1, dtype=complex))
    assert mutual_information(e, 3.0) == pytest.approx(2.0)
    assert mutual_information(e, 0.0) == 0.0
    two = EquivalentChannel(np.eye(2, dtype=complex), 2 * np.eye(2, dtype=complex))
    assert mutual_information(two, 6.0) == pytest.approx(2.0)


def test_mi_batch_and_oracle():
    rng = np.random.default_rng(3)
    H = np.tril(rng.normal(size=(50, 4, 4)) + 1j * rng.normal(size=(50, 4, 4)))
    T = rng.normal(size=(50, 4, 4)) + 1j * rng.normal(size=(50, 4, 4))
    S = np.eye(4) + T @ np.conj(np.swapaxes(T, -1, -2))
    mi = mutual_information(EquivalentChannel(H, S), 20.0)
    ref = [mi_eigen(H[k], S[k], 20.0) for k in range(50)]
    assert np.allclose(mi, ref, rtol=1e-10)


def test_mi_monotone_in_snr():
    rng = np.random.default_rng(4)
    H = rng.normal(size=(30, 3, 3)) + 1j * rng.normal(size=(30, 3, 3))
    e = EquivalentChannel(H, np.broadcast_to(np.eye(3, dtype=complex), H.shape).copy())
    prev = mutual_information(e, 0.01)
    for snr in np.logspace(-1, 5, 13):
        cur = mutual_information(e, snr)
        assert np.all(cur >= prev - 1e-12)
        prev = cur


def test_extreme_rates():
    stats = symmetric_network(2)
    c = outage_counts(SAF3, stats, [10.0], [0.0, 1e6], 2000, 1)
    assert c[0, 0] == 0 and c[0, 1] == 2000


def test_rayleigh_oracle():
    # larger variance shifts the curve; check two variances
    for var in (1.0, 2.0):
        stats = LinkStats(1, var, [1.0], [1.0], [[0.0]])
        est = estimate_outage(NONCOOP, stats, 10.0, 2.0, 200_000, 5)
        p = rayleigh_outage(2.0, 10.0, var)
        assert abs(est.p_hat - p) <= 3 * math.sqrt(p * (1 - p) / est.n_samples)


def test_estimate_fields():
    est = OutageEstimate.from_count(25, 100, 10.0, 2.0)
    assert est.p_hat == 0.25
    assert est.stderr == pytest.approx(math.sqrt(0.25 * 0.75 / 100))
    with pytest.raises(ValueError):
        OutageCurve.from_arrays([10, 5], [0.1, 0.2])


# ---------------------------------------------------------------- diagnostics

def test_slope_examples():
    s = np.arange(10, 41, 5.0)
    c = OutageCurve.from_arrays(s, 10 ** (-2 * s / 10))
    assert diversity_slope(c, (10, 40)) == pytest.approx(2.0)
    two = OutageCurve.from_arrays([20, 30], [1e-2, 1e-3])
    assert diversity_slope(two, (0, 100)) == pytest.approx(1.0)
    # points above 0.1 and zeros are excluded
    mixed = OutageCurve.from_arrays([0, 10, 20, 30], [0.5, 0.05, 0.005, 0.0])
    assert diversity_slope(mixed, (0, 30)) == pytest.approx(1.0)
    with pytest.raises(DiagnosticError):
        diversity_slope(OutageCurve.from_arrays([0, 10], [0.5, 0.05]), (0, 10))


def test_snr_at_interpolates_log():
    c = OutageCurve.from_arrays([20, 30], [1e-2, 1e-4])
    assert snr_at(1e-3, c) == pytest.approx(25.0)
    assert snr_at(1e-2, c) == pytest.approx(20.0)
    with pytest.raises(DiagnosticError):
        snr_at(1e-6, c)


def test_power_gain_examples():
    s = np.arange(0, 41, 2.0)
    a = OutageCurve.from_arrays(s, 10 ** (-s / 10))
    b = OutageCurve.from_arrays(s, 10 ** (-(s - 3) / 10))
    assert power_gain_at(1e-3, a, a) == 0.0
    assert power_gain_at(1e-3, a, b) == pytest.approx(3.0)
    assert power_gain_at(1e-3, b, a) == pytest.approx(-3.0)
    with pytest.raises(DiagnosticError):
        power_gain_at(1e-9, a, b)


def test_sample_count_warning():
    assert warn_sample_count(1e-3, 10_000) is not None
    assert warn_sample_count(1e-3, 2_000_000) is None


# ---------------------------------------------------------------- engine

def test_chunk_and_worker_invariance(monkeypatch):
    stats = symmetric_network(2)
    args = (SAF3, stats, [0.0, 10.0, 20.0], [2.0, 6.0], 5000, 42)
    base = outage_counts(*args, workers=1)
    monkeypatch.setattr(outage, "CHUNK", 777)
    assert np.array_equal(outage_counts(*args, workers=1), base)
    assert np.array_equal(outage_counts(*args, workers=2), base)
    monkeypatch.setenv(outage.WORKERS_ENV, "3")
    assert np.array_equal(outage_counts(*args), base)
    monkeypatch.setenv(outage.WORKERS_ENV, "many")
    with pytest.raises(ConfigError):
        outage_counts(*args)


def test_snr_points_share_realizations():
    stats = symmetric_network(2)
    joint = outage_counts(SAF3, stats, [5.0, 15.0], [3.0], 3000, 7)
    alone = outage_counts(SAF3, stats, [15.0], [3.0], 3000, 7)
    assert joint[1, 0] == alone[0, 0]


def test_doubling_samples_consistent():
    stats = symmetric_network(2)
    a = estimate_outage(SAF3, stats, 15.0, 4.0, 20_000, 1)
    b = estimate_outage(SAF3, stats, 15.0, 4.0, 40_000, 2)
    assert abs(a.p_hat - b.p_hat) <= 4 * math.hypot(a.stderr, b.stderr)


@pytest.mark.parametrize(
    "scheme",
    [NONCOOP, SAF3, SchemeSpec("naf", n_relays=2), SchemeSpec("sequential_saf", n_slots=5, scheduling="smart")],
    ids=lambda s: s.label,
)
def test_curve_non_increasing(scheme):
    stats = symmetric_network(2)
    (c,) = outage_curves(scheme, stats, np.arange(0, 31, 5.0), [4.0], 20_000, 3)
    p = c.p_hat
    se = np.array([q.stderr for q in c.points])
    # same realizations at every SNR: the count is exactly monotone here
    assert np.all(np.diff(p) <= 3 * se[1:] + 1e-15)


def test_saf_slope_not_above_full_diversity():
    stats = symmetric_network(2)
    (c,) = outage_curves(SAF3, stats, np.arange(20, 41, 5.0), [2.0], 100_000, 9)
    assert diversity_slope(c, (20, 40)) <= 3 + 0.3


@pytest.mark.parametrize(
    "scheme,n",
    [
        (SchemeSpec("naf", n_relays=3), 2),
        (SchemeSpec("sequential_saf", n_slots=3), 1),
        (SchemeSpec("sequential_saf", n_slots=3, scheduling="smart"), 1),
        (SchemeSpec("sequential_saf", n_slots=3, scheduling="ordered2r3s"), 3),
        (SchemeSpec("sequential_saf", n_slots=4, scheduling="ordered2r3s"), 2),
    ],
)
def test_scheme_network_mismatch(scheme, n):
    with pytest.raises(ConfigError):
        outage_counts(scheme, symmetric_network(n), [10.0], [2.0], 100, 1)


def test_zero_samples_rejected():
    with pytest.raises(ConfigError):
        outage_counts(NONCOOP, symmetric_network(1), [10.0], [2.0], 0, 1)
