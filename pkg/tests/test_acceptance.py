"""End-to-end checks of the whole toolkit, one test per guarantee.

Every test pins its seeds, asserts the substantive tolerance, and (where a
budget applies) asserts its wall-clock budget, so `pytest -v` reads as a
pass/fail line per guarantee.
"""

import json
import math
import os
import time
from itertools import product

import numpy as np
from numba import njit

from volintervals import (
    IntervalSeries,
    MinuteBarSeries,
    cluster_size_distribution,
    collapse_quality,
    conditional_pdf,
    extract_intervals,
    fit_power_law,
    fit_stretched_exponential,
    generate,
    log_binned_pdf,
    log_returns,
    mean_conditional_interval,
    normalize_volatility,
    parse_generator_spec,
    persistence_curve,
    scale_distribution,
)
from volintervals.cli import main


def check_budget(t0, limit_s):
    elapsed = time.perf_counter() - t0
    assert elapsed < limit_s, f"runtime {elapsed:.1f}s exceeds the {limit_s}s budget"
    return elapsed


def test_01_interval_extraction_matches_brute_force_scan():
    t0 = time.perf_counter()
    rng = np.random.default_rng(17)
    for trial in range(1000):
        n = int(rng.integers(2, 1001))
        values = rng.exponential(size=n)
        if trial % 3 == 0:
            values = np.round(values, 1)  # force ties at the threshold
        q = float(np.quantile(values, rng.uniform(0.2, 0.98)))
        series = extract_intervals(values, q)
        hits = [i for i, v in enumerate(values) if v >= q]
        expected = [b - a for a, b in zip(hits, hits[1:])]
        np.testing.assert_array_equal(series.taus, expected)
        assert series.n_exceedances == len(hits)
        assert series.count == len(expected)
    elapsed = check_budget(t0, 5)
    print(f"1000 series identical to the index scan ({elapsed:.1f}s)")


def test_02_memoryless_baseline_mean_gamma_and_collapse():
    t0 = time.perf_counter()
    values = generate(parse_generator_spec("iid_exceedance:length=1000000,p=0.1,seed=12"))
    series = extract_intervals(values, 0.5)
    assert abs(series.mean_tau - 10.0) <= 0.1

    scaled = scale_distribution(log_binned_pdf(series), series.mean_tau)
    fit = fit_stretched_exponential(scaled)
    assert abs(fit.gamma - 1.0) <= 0.05  # memoryless intervals are exponential

    dists = []
    for p in (0.05, 0.1, 0.2):
        v = generate(parse_generator_spec(f"iid_exceedance:length=1000000,p={p},seed=12"))
        s = extract_intervals(v, 0.5)
        dists.append(scale_distribution(log_binned_pdf(s), s.mean_tau))
    cq = collapse_quality(dists)
    assert cq < 0.3
    elapsed = check_budget(t0, 30)
    print(f"mean_tau={series.mean_tau:.4f} gamma={fit.gamma:.4f} collapse={cq:.4f} ({elapsed:.1f}s)")


def test_03_stretched_exponential_fit_recovers_known_parameters():
    t0 = time.perf_counter()
    gamma_true, alpha_true = 0.7, 3.0
    samples = generate(
        parse_generator_spec("stretched_exp_intervals:length=1000000,gamma=0.7,alpha=3.0,seed=5")
    )
    mean = float(samples.mean())
    scaled = scale_distribution(log_binned_pdf(samples), mean)
    fit = fit_stretched_exponential(scaled)
    alpha_hat = fit.alpha * mean ** (-fit.gamma)  # undo the x = tau/mean change of variable
    gamma_err = abs(fit.gamma - gamma_true) / gamma_true
    alpha_err = abs(alpha_hat - alpha_true) / alpha_true
    assert gamma_err <= 0.10
    assert alpha_err <= 0.15
    elapsed = check_budget(t0, 30)
    print(
        f"gamma={fit.gamma:.4f} ({gamma_err:.1%} off), alpha={alpha_hat:.4f} "
        f"({alpha_err:.1%} off) ({elapsed:.1f}s)"
    )


def test_04_memoryless_intervals_show_flat_conditional_means():
    t0 = time.perf_counter()
    taus = np.random.default_rng(3).geometric(0.1, size=100000).astype(np.int64)
    series = IntervalSeries(taus=taus, q=1.0, n_exceedances=taus.size + 1)
    table = mean_conditional_interval(series, k_bins=8, n_shuffles=20, seed=50)
    dev = np.abs(table.means - 1.0)
    z = np.abs(table.means - table.shuffle_means) / table.shuffle_stds
    assert np.all(dev <= 0.05)
    assert np.all(z <= 3.0)
    elapsed = check_budget(t0, 10)
    print(f"max |mean-1|={dev.max():.4f}, max shuffle z={z.max():.2f} ({elapsed:.1f}s)")


def test_05_long_memory_intervals_show_conditional_structure():
    t0 = time.perf_counter()
    x = generate(parse_generator_spec("long_memory_volatility:length=1000000,hurst=0.8,seed=2"))
    q = float(np.quantile(x, 0.9))
    series = extract_intervals(x, q)

    subsets = conditional_pdf(series)
    lower, upper = subsets["lower"], subsets["upper"]
    solid = (lower.counts >= 10) & (upper.counts >= 10)
    small = solid & (lower.centers < 0.3)
    large = solid & (lower.centers > 3.0)
    assert small.any() and large.any()
    # short intervals follow short ones, long follow long
    assert np.all(lower.densities[small] > upper.densities[small])
    assert np.all(upper.densities[large] > lower.densities[large])

    table = mean_conditional_interval(series, k_bins=8, n_shuffles=20, seed=1002)
    assert np.all(np.diff(table.means) > 0), f"not strictly increasing: {table.means}"
    elapsed = check_budget(t0, 60)
    print(
        f"{int(small.sum())} small / {int(large.sum())} large bins ordered, "
        f"means {table.means.round(3)} ({elapsed:.1f}s)"
    )


def test_06_memoryless_cluster_sizes_follow_halving_law():
    t0 = time.perf_counter()
    taus = np.random.default_rng(4).permutation(np.arange(1, 1000001)).astype(np.int64)
    series = IntervalSeries(taus=taus, q=1.0, n_exceedances=taus.size + 1)
    worst = 0.0
    for dist in cluster_size_distribution(series):
        assert dist.max_size >= 15
        for n in range(1, 16):
            p = 2.0 ** (1 - n)
            se = math.sqrt(p * (1 - p) / dist.n_clusters)
            gap = abs(dist.cumulative[n - 1] - p)
            assert gap <= 3 * se, f"size {n}: {dist.cumulative[n - 1]} vs {p} (3se={3 * se:.2g})"
            if se > 0:
                worst = max(worst, gap / se)
    elapsed = check_budget(t0, 10)
    print(f"cumulative within 3 se up to n=15, worst z={worst:.2f} ({elapsed:.1f}s)")


@njit
def _brute_persistence_counts(x, t_max):
    n = x.size
    out = np.zeros((2, t_max), dtype=np.int64)
    for t in range(1, t_max + 1):
        for i in range(n - t):
            up = True
            dn = True
            for j in range(i + 1, i + 1 + t):
                if x[j] <= x[i]:
                    up = False
                if x[j] >= x[i]:
                    dn = False
                if not (up or dn):
                    break
            if up:
                out[0, t - 1] += 1
            if dn:
                out[1, t - 1] += 1
    return out


def test_07_persistence_exhaustive_walk_and_uniform_oracles():
    t0 = time.perf_counter()
    # every sequence of length 2..12 over {1,2,3}: 797,157 of them
    checked = 0
    for n in range(2, 13):
        starts = np.arange(n - 1, 0, -1, dtype=np.float64)
        for seq in product((1.0, 2.0, 3.0), repeat=n):
            x = np.array(seq)
            counts = _brute_persistence_counts(x, n - 1)
            curve = persistence_curve(x, n - 1)
            if not (
                np.array_equal(curve.p_plus, counts[0] / starts)
                and np.array_equal(curve.p_minus, counts[1] / starts)
            ):
                raise AssertionError(f"mismatch on {seq}")
            checked += 1
    assert checked == 797157

    walk = generate(parse_generator_spec("random_walk:length=1000000,seed=21"))
    curve = persistence_curve(walk, 100)
    beta_plus = fit_power_law(curve, sign="+", fit_range=(4, 100)).beta
    beta_minus = fit_power_law(curve, sign="-", fit_range=(4, 100)).beta
    assert abs(beta_plus - 0.5) <= 0.05
    assert abs(beta_minus - 0.5) <= 0.05

    u = np.random.default_rng(8).random(1000000)
    curve = persistence_curve(u, 100)
    t = curve.t_values
    p = 1.0 / (t + 1.0)  # continuous exchangeable values
    se = np.sqrt(p * (1 - p) / curve.n_starts)
    z_plus = np.abs(curve.p_plus - p) / se
    z_minus = np.abs(curve.p_minus - p) / se
    assert z_plus.max() <= 3.0
    assert z_minus.max() <= 3.0
    elapsed = check_budget(t0, 60)
    print(
        f"{checked} sequences exact, walk beta {beta_plus:.3f}/{beta_minus:.3f}, "
        f"uniform worst z={max(z_plus.max(), z_minus.max()):.2f} ({elapsed:.1f}s)"
    )


def test_08_pipeline_reruns_are_byte_identical(tmp_path):
    t0 = time.perf_counter()
    args = [
        "pipeline",
        "--generator", "long_memory_volatility:length=200000,hurst=0.8,seed=9",
        "--q", "1.0", "--q", "1.5",
        "--seed", "11",
    ]
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(args + ["--out", a]) == 0
    assert main(args + ["--out", b]) == 0
    # report.json carries wall-clock timings; every analysis artifact must match
    names = sorted(n for n in os.listdir(a) if n != "report.json")
    assert names == sorted(n for n in os.listdir(b) if n != "report.json")
    assert names  # the run really produced artifacts
    for name in names:
        with open(os.path.join(a, name), "rb") as fa, open(os.path.join(b, name), "rb") as fb:
            assert fa.read() == fb.read(), f"{name} differs between runs"
    report = json.loads((tmp_path / "a" / "report.json").read_text())
    assert report["exit"] == {"status": "ok"}
    elapsed = check_budget(t0, 60)
    print(f"{len(names)} artifacts byte-identical across runs ({elapsed:.1f}s)")


def analysis_chain(prices):
    timestamps = np.datetime64("2026-01-05T09:30:00") + np.arange(prices.size) * np.timedelta64(
        60, "s"
    )
    session_ids = np.repeat(np.arange(prices.size // 100), 100)
    bars = MinuteBarSeries(timestamps=timestamps, prices=prices, session_ids=session_ids)
    vol = normalize_volatility(log_returns(bars), mode="std")
    series = extract_intervals(vol, 1.5)
    scaled = scale_distribution(log_binned_pdf(series), series.mean_tau)
    fit = fit_stretched_exponential(scaled)
    return series, scaled, fit


def rel_gap(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(a), np.abs(b))
    return float(np.max(np.where(scale > 0, np.abs(a - b) / np.maximum(scale, 1e-300), 0.0)))


def test_09_price_rescaling_leaves_every_statistic_in_place():
    rng = np.random.default_rng(5)
    prices = 100.0 * np.exp(np.cumsum(rng.normal(0.0, 0.01, size=5000)))
    base_series, base_scaled, base_fit = analysis_chain(prices)
    big_series, big_scaled, big_fit = analysis_chain(prices * 7.3)

    assert base_series.count == big_series.count
    worst = max(
        rel_gap(base_series.mean_tau, big_series.mean_tau),
        rel_gap(base_scaled.densities, big_scaled.densities),
        rel_gap(base_fit.gamma, big_fit.gamma),
        rel_gap(base_fit.alpha, big_fit.alpha),
        rel_gap(base_fit.c, big_fit.c),
    )
    assert worst <= 1e-9
    print(f"{base_series.count} intervals, worst relative drift {worst:.2e}")
