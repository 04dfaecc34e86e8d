import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volintervals import (
    ConfigError,
    DataError,
    IntervalSeries,
    cluster_size_distribution,
    conditional_pdf,
    mean_conditional_interval,
    split_by_rank,
)


def series(taus):
    taus = np.asarray(taus, dtype=np.int64)
    return IntervalSeries(taus=taus, q=1.0, n_exceedances=taus.size + 1)


def iid_geometric_series(p, n, seed):
    rng = np.random.default_rng(seed)
    return series(rng.geometric(p, size=n))


# ---------------------------------------------------------------------------
# rank split


def test_split_by_rank_hand_case():
    split = split_by_rank(np.array([5.0, 1.0, 3.0, 2.0, 4.0]), 2)
    assert split.k == 2
    assert split.labels.tolist() == [1, 0, 0, 0, 1]  # three smallest -> 0, two largest -> 1


def test_split_by_rank_ties_stay_stable():
    split = split_by_rank(np.array([2.0, 2.0, 2.0, 2.0]), 2)
    assert split.labels.tolist() == [0, 0, 1, 1]  # earlier occurrences fill lower bins


@given(
    values=st.lists(st.integers(1, 50), min_size=2, max_size=300),
    k=st.integers(2, 8),
)
@settings(max_examples=150, deadline=None)
def test_split_populations_balanced(values, k):
    if k > len(values):
        k = len(values)
    labels = split_by_rank(np.asarray(values, dtype=float), k).labels
    pops = np.bincount(labels, minlength=k)
    assert pops.max() - pops.min() <= 1
    assert pops.sum() == len(values)
    # sorted by value, labels are non-decreasing
    order = np.argsort(values, kind="stable")
    assert (np.diff(labels[order]) >= 0).all()


# ---------------------------------------------------------------------------
# conditional PDF


def test_conditional_pdf_disjoint_hand_case():
    # successors of the small half vs the large half are disjoint multisets
    s = series([9, 1, 9, 1, 9, 1])
    subsets = conditional_pdf(s)
    lower, upper = subsets["lower"], subsets["upper"]
    # lower tau0 (the 1s at positions 1, 3) are followed by 9s; position 5
    # is last and conditions nothing
    assert lower.counts.sum() == 2
    assert upper.counts.sum() == 3
    mean_tau = s.mean_tau
    j9 = np.flatnonzero(lower.counts)
    assert len(j9) == 1
    assert lower.edges[j9[0]] * mean_tau <= 9 < lower.edges[j9[0] + 1] * mean_tau
    j1 = np.flatnonzero(upper.counts)
    assert len(j1) == 1
    assert upper.edges[j1[0]] * mean_tau <= 1 < upper.edges[j1[0] + 1] * mean_tau


def test_conditional_pdf_successor_totals():
    s = iid_geometric_series(0.2, 5000, 1)
    subsets = conditional_pdf(s)
    assert sum(d.counts.sum() for d in subsets.values()) == s.count - 1


def test_conditional_pdf_shares_bin_grid():
    s = iid_geometric_series(0.1, 20000, 2)
    subsets = conditional_pdf(s)
    np.testing.assert_array_equal(subsets["lower"].edges, subsets["upper"].edges)
    assert subsets["lower"].scale_factor == subsets["upper"].scale_factor


def test_conditional_pdf_iid_halves_agree():
    s = iid_geometric_series(0.1, 200000, 3)
    subsets = conditional_pdf(s)
    lo, up = subsets["lower"], subsets["upper"]
    n1, n2 = lo.counts.sum(), up.counts.sum()
    both = (lo.counts >= 10) & (up.counts >= 10)
    assert both.sum() >= 5
    for j in np.flatnonzero(both):
        p1, p2 = lo.counts[j] / n1, up.counts[j] / n2
        pooled = (lo.counts[j] + up.counts[j]) / (n1 + n2)
        se = np.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
        assert abs(p1 - p2) <= 3 * se


def test_conditional_pdf_omits_empty_subset_with_warning():
    s = series([3, 7])
    with pytest.warns(UserWarning, match="no successors"):
        subsets = conditional_pdf(s)
    assert sorted(subsets) == ["lower"]
    assert subsets["lower"].counts.sum() == 1


def test_conditional_pdf_needs_two_intervals():
    with pytest.raises(DataError):
        conditional_pdf(series([4]))


# ---------------------------------------------------------------------------
# conditional mean


def test_monotone_construction_orders_bins():
    s = series(list(range(1, 101)))
    table = mean_conditional_interval(s, k_bins=2, n_shuffles=5, seed=0)
    assert table.means[1] > table.means[0]


def test_iid_conditional_means_are_flat():
    s = iid_geometric_series(0.1, 100000, 3)
    table = mean_conditional_interval(s, k_bins=8, n_shuffles=20, seed=50)
    assert np.nanmax(np.abs(table.means - 1.0)) < 0.05
    dev = np.abs(table.means - table.shuffle_means) / table.shuffle_stds
    assert np.nanmax(dev) < 3.0


def test_shuffle_baseline_is_flat_for_any_input():
    # strong memory in the data, none in its shuffles
    taus = np.repeat([1, 30], 2000)
    table = mean_conditional_interval(series(taus), k_bins=4, n_shuffles=20, seed=9)
    assert np.nanmax(np.abs(table.shuffle_means - 1.0)) < 3 * np.nanmax(table.shuffle_stds)


def test_conditional_mean_is_deterministic():
    s = iid_geometric_series(0.2, 5000, 4)
    a = mean_conditional_interval(s, k_bins=8, n_shuffles=10, seed=7)
    b = mean_conditional_interval(s, k_bins=8, n_shuffles=10, seed=7)
    np.testing.assert_array_equal(a.means, b.means)
    np.testing.assert_array_equal(a.shuffle_means, b.shuffle_means)
    c = mean_conditional_interval(s, k_bins=8, n_shuffles=10, seed=8)
    assert not np.array_equal(b.shuffle_means, c.shuffle_means)


def test_seed_is_mandatory():
    s = iid_geometric_series(0.2, 1000, 5)
    with pytest.raises(ConfigError):
        mean_conditional_interval(s, k_bins=4, n_shuffles=5, seed=None)
    with pytest.raises(ConfigError):
        mean_conditional_interval(s, k_bins=1, n_shuffles=5, seed=1)


def test_successor_accounting():
    s = iid_geometric_series(0.3, 997, 6)
    table = mean_conditional_interval(s, k_bins=8, n_shuffles=5, seed=2)
    assert table.n_successors.sum() == s.count - 1


# ---------------------------------------------------------------------------
# clusters


def test_cluster_hand_case_with_median_ties():
    # median is 9; ties go to the minus side, so every label is '-'
    plus, minus = cluster_size_distribution(series([9, 9, 9, 1, 1]))
    assert plus.n_clusters == 0
    assert plus.max_size == 0
    assert minus.n_clusters == 1
    assert minus.sizes.tolist() == [1, 2, 3, 4, 5]
    np.testing.assert_array_equal(minus.cumulative, np.ones(5))


def test_cluster_mixed_runs():
    plus, minus = cluster_size_distribution(series([10, 10, 1, 1, 10, 1]))
    # labels: + + - - + -  -> plus runs {2, 1}, minus runs {2, 1}
    for dist in (plus, minus):
        assert dist.n_clusters == 2
        assert dist.max_size == 2
        np.testing.assert_allclose(dist.cumulative, [1.0, 0.5])


def test_alternating_labels_give_unit_clusters():
    plus, minus = cluster_size_distribution(series([2, 1, 2, 1, 2, 1]))
    assert plus.max_size == 1 and minus.max_size == 1
    np.testing.assert_array_equal(plus.cumulative, [1.0])


def test_cluster_totals_cover_all_intervals():
    s = iid_geometric_series(0.1, 50000, 8)
    plus, minus = cluster_size_distribution(s)
    total = 0
    for dist in (plus, minus):
        counts_ge = np.round(dist.cumulative * dist.n_clusters).astype(int)
        counts_exact = counts_ge - np.append(counts_ge[1:], 0)
        total += int((counts_exact * dist.sizes).sum())
    assert total == s.count


def test_iid_label_run_law():
    rng = np.random.default_rng(4)
    taus = rng.permutation(np.arange(1, 100001))
    plus, minus = cluster_size_distribution(series(taus))
    for dist in (plus, minus):
        for n in range(1, 9):
            target = 2.0 ** (1 - n)
            se = np.sqrt(target * (1 - target) / dist.n_clusters)
            assert abs(dist.cumulative[n - 1] - target) <= 3 * se + 1e-12


def test_cluster_degenerate_input_rejected():
    with pytest.raises(DataError, match="degenerate"):
        cluster_size_distribution(series([4, 4, 4, 4]))


def test_cumulative_is_a_survival_function():
    s = iid_geometric_series(0.2, 20000, 9)
    plus, minus = cluster_size_distribution(s)
    for dist in (plus, minus):
        assert dist.cumulative[0] == 1.0
        assert (np.diff(dist.cumulative) <= 1e-12).all()
        assert dist.cumulative[-1] > 0
