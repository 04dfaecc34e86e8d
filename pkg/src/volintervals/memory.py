"""Memory diagnostics on interval sequences.

Three views of the same question — does a small interval tend to follow a
small interval?  Conditional distributions split by the size of the
preceding interval, mean successor intervals across quantile bins of the
predecessor (with a shuffled baseline), and cluster-size statistics of the
above/below-median sign sequence.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .distributions import BinnedDistribution, log_binned_pdf, scale_distribution
from .errors import ConfigError, DataError
from .intervals import IntervalSeries

SPLIT_MODES = ("halves",)


@dataclass(frozen=True)
class ConditionSplit:
    """Assignment of each interval to a condition class by sorted rank.

    ``labels[i]`` is the class of ``taus[i]``; class populations differ by
    at most one.  Ranking uses a stable argsort, so ties split
    deterministically by position.
    """

    labels: np.ndarray
    k: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        if self.k < 2:
            raise ConfigError(f"need at least 2 classes, got {self.k}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise ConfigError("labels out of range")
        counts = np.bincount(labels, minlength=self.k)
        if counts.max() - counts.min() > 1:
            raise ConfigError("class populations differ by more than one")
        labels = labels.copy()
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)


def split_by_rank(values: np.ndarray, k: int) -> ConditionSplit:
    """Partition values into k near-equal classes by ascending rank."""
    values = np.asarray(values)
    n = values.size
    if n < k:
        raise DataError(f"insufficient data: {n} values cannot fill {k} classes")
    order = np.argsort(values, kind="stable")
    labels = np.empty(n, dtype=np.int64)
    labels[order] = (np.arange(n, dtype=np.int64) * k) // n
    return ConditionSplit(labels=labels, k=k)


def _taus_of(intervals) -> np.ndarray:
    if isinstance(intervals, IntervalSeries):
        return np.asarray(intervals.taus, dtype=np.int64)
    taus = np.asarray(intervals, dtype=np.int64)
    if taus.ndim != 1:
        raise ConfigError("intervals must be one-dimensional")
    if taus.size and taus.min() < 1:
        raise DataError("invalid interval: intervals must be >= 1")
    return taus


def conditional_pdf(
    intervals,
    split: str = "halves",
    bins_per_decade: int = 10,
) -> dict[str, BinnedDistribution]:
    """Scaled successor distributions conditioned on the preceding interval.

    The intervals are ranked and divided into a lower and an upper half;
    for every interval except the last (which has no successor), its
    successor is attributed to the half the *predecessor* fell in.  Both
    subsets are binned on one shared grid and scaled by the global mean
    interval, so the two curves are directly comparable bin by bin.
    """
    if split not in SPLIT_MODES:
        raise ConfigError(f"unknown split mode {split!r}")
    taus = _taus_of(intervals)
    if taus.size < 2:
        raise DataError("insufficient data: need at least 2 intervals to condition")
    mean_tau = float(taus.sum() / taus.size)
    labels = split_by_rank(taus, 2).labels
    shared_range = (1.0, float(taus.max()))
    out: dict[str, BinnedDistribution] = {}
    for label, name in ((0, "lower"), (1, "upper")):
        successors = taus[1:][labels[:-1] == label]
        if successors.size == 0:
            warnings.warn(f"no successors in the {name} half; subset omitted")
            continue
        dist = log_binned_pdf(
            successors,
            bins_per_decade=bins_per_decade,
            discrete=True,
            data_range=shared_range,
        )
        out[name] = scale_distribution(dist, mean_tau)
    return out


@dataclass(frozen=True)
class MeanConditionalTable:
    """Mean successor interval per predecessor quantile bin, with baseline.

    All interval quantities are in units of the global mean interval.
    Bins whose members have no successors hold NaN means with n = 0 —
    missing, not zero.  ``shuffle_mean``/``shuffle_std`` summarize the same
    statistic over seeded random permutations of the sequence.
    """

    bin_centers: np.ndarray
    means: np.ndarray
    shuffle_means: np.ndarray
    shuffle_stds: np.ndarray
    n_successors: np.ndarray
    k_bins: int
    n_shuffles: int
    seed: int

    def __post_init__(self) -> None:
        for name in ("bin_centers", "means", "shuffle_means", "shuffle_stds"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        ns = np.asarray(self.n_successors, dtype=np.int64).copy()
        ns.setflags(write=False)
        object.__setattr__(self, "n_successors", ns)


def _conditional_means(taus: np.ndarray, k_bins: int, mean_tau: float):
    """Per-quantile-bin (center, mean successor, n) in units of mean_tau."""
    labels = split_by_rank(taus, k_bins).labels
    centers = np.full(k_bins, math.nan)
    means = np.full(k_bins, math.nan)
    ns = np.zeros(k_bins, dtype=np.int64)
    pred_labels = labels[:-1]
    successors = taus[1:].astype(np.float64)
    for b in range(k_bins):
        members = taus[labels == b]
        if members.size:
            centers[b] = members.mean() / mean_tau
        chosen = successors[pred_labels == b]
        ns[b] = chosen.size
        if chosen.size:
            means[b] = chosen.mean() / mean_tau
    return centers, means, ns


def mean_conditional_interval(
    intervals,
    k_bins: int = 8,
    n_shuffles: int = 20,
    seed: int | None = None,
) -> MeanConditionalTable:
    """Mean successor interval across predecessor quantile bins.

    Parameters
    ----------
    intervals : IntervalSeries or integer array.
    k_bins : number of equal-population predecessor bins.
    n_shuffles : permutations for the no-memory baseline.  Shuffling
        permutes the order only, so the interval multiset — and hence the
        global mean — is bit-identical in every shuffle.
    seed : root seed for the permutations; mandatory so runs reproduce.
        Per-shuffle streams are derived by index through
        ``SeedSequence(seed).spawn``, independent of evaluation order.
    """
    if seed is None:
        raise ConfigError("seed is required for the shuffled baseline")
    if k_bins < 2:
        raise ConfigError(f"k_bins must be >= 2, got {k_bins}")
    if n_shuffles < 2:
        raise ConfigError(f"n_shuffles must be >= 2, got {n_shuffles}")
    taus = _taus_of(intervals)
    if taus.size < max(k_bins, 2):
        raise DataError(f"insufficient data: {taus.size} intervals for {k_bins} bins")
    mean_tau = float(taus.sum() / taus.size)

    centers, means, ns = _conditional_means(taus, k_bins, mean_tau)

    children = np.random.SeedSequence(seed).spawn(n_shuffles)
    shuffled = np.empty((n_shuffles, k_bins))
    for s in range(n_shuffles):
        rng = np.random.default_rng(children[s])
        perm = rng.permutation(taus.size)
        _, sh_means, _ = _conditional_means(taus[perm], k_bins, mean_tau)
        shuffled[s] = sh_means
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN bins stay NaN
        shuffle_means = np.nanmean(shuffled, axis=0)
        shuffle_stds = np.nanstd(shuffled, axis=0, ddof=1)

    return MeanConditionalTable(
        bin_centers=centers,
        means=means,
        shuffle_means=shuffle_means,
        shuffle_stds=shuffle_stds,
        n_successors=ns,
        k_bins=k_bins,
        n_shuffles=n_shuffles,
        seed=seed,
    )


@dataclass(frozen=True)
class ClusterSizeDistribution:
    """Cumulative size distribution of consecutive same-sign runs.

    ``cumulative[n-1]`` is the fraction of clusters of size >= n, so
    cumulative[0] = 1 and the sequence is non-increasing.
    """

    sign: str
    sizes: np.ndarray
    cumulative: np.ndarray
    n_clusters: int

    def __post_init__(self) -> None:
        if self.sign not in ("+", "-"):
            raise ConfigError(f"sign must be '+' or '-', got {self.sign!r}")
        sizes = np.asarray(self.sizes, dtype=np.int64).copy()
        cum = np.asarray(self.cumulative, dtype=np.float64).copy()
        if self.n_clusters > 0:
            if cum.size == 0 or abs(cum[0] - 1.0) > 1e-12:
                raise ConfigError("cumulative(1) must equal 1")
            if np.any(np.diff(cum) > 1e-12):
                raise ConfigError("cumulative must be non-increasing")
        sizes.setflags(write=False)
        cum.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "cumulative", cum)

    @property
    def max_size(self) -> int:
        return int(self.sizes.max()) if self.sizes.size else 0


def _run_sizes(flags: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sizes of maximal constant runs and the flag value of each run."""
    n = flags.size
    starts = np.flatnonzero(np.r_[True, flags[1:] != flags[:-1]])
    ends = np.r_[starts[1:], n]
    return (ends - starts).astype(np.int64), flags[starts]


def cluster_size_distribution(
    intervals,
) -> tuple[ClusterSizeDistribution, ClusterSizeDistribution]:
    """Cluster statistics of the above/below-median sign sequence.

    Each interval is labeled '+' when strictly above the median and '-'
    otherwise (values equal to the median count as '-'), and maximal
    same-label runs form clusters.  Returns the (plus, minus) cumulative
    size distributions.
    """
    taus = _taus_of(intervals)
    if taus.size == 0:
        raise DataError("no intervals: nothing to cluster")
    if np.all(taus == taus[0]):
        raise DataError("degenerate: no median split for identical intervals")
    median = float(np.median(taus))
    above = taus > median
    sizes, values = _run_sizes(above)
    out = []
    for sign, flag in (("+", True), ("-", False)):
        own = sizes[values == flag]
        if own.size == 0:
            out.append(
                ClusterSizeDistribution(
                    sign=sign,
                    sizes=np.empty(0, dtype=np.int64),
                    cumulative=np.empty(0),
                    n_clusters=0,
                )
            )
            continue
        max_n = int(own.max())
        counts = np.bincount(own, minlength=max_n + 1)[1:]
        survival = np.cumsum(counts[::-1])[::-1] / own.size
        out.append(
            ClusterSizeDistribution(
                sign=sign,
                sizes=np.arange(1, max_n + 1, dtype=np.int64),
                cumulative=survival,
                n_clusters=int(own.size),
            )
        )
    return out[0], out[1]
