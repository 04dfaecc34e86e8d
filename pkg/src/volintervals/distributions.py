"""Log-binned interval distributions, scaling, and stretched-exponential fits.

Binning uses a base-10 logarithmic grid with edges 10**(k/bins_per_decade)
anchored so that k = 0 lands on 1.0.  For integer-valued data (interval
sequences) the density divides by the number of lattice points inside each
bin rather than the raw edge difference: at small values a log bin spans a
fraction of the unit lattice spacing, and dividing by the geometric width
would alias the discrete mass into a sawtooth that never collapses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, FitError
from .intervals import IntervalSeries

_NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class BinnedDistribution:
    """Histogram density on a logarithmic grid.

    Fields
    ------
    edges : (B+1,) strictly increasing positive bin boundaries.
    counts : (B,) occupancy per bin.
    widths : (B,) support measure per bin — lattice-point count for
        discrete data, edge difference for continuous data.  Densities are
        counts / (total * width); empty bins keep zero density.
    centers : (B,) representative abscissa per bin.
    total : number of observations binned.
    discrete : whether the underlying sample lives on the integer lattice.
    scaled : True once the axes have been rescaled by a mean interval.
    scale_factor : the mean interval used for scaling (None when unscaled).
    """

    edges: np.ndarray
    counts: np.ndarray
    widths: np.ndarray
    centers: np.ndarray
    densities: np.ndarray
    total: int
    discrete: bool
    scaled: bool = False
    scale_factor: float | None = None

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.float64)
        counts = np.asarray(self.counts, dtype=np.int64)
        widths = np.asarray(self.widths, dtype=np.float64)
        centers = np.asarray(self.centers, dtype=np.float64)
        densities = np.asarray(self.densities, dtype=np.float64)
        nbins = edges.size - 1
        if nbins < 1:
            raise ConfigError("a distribution needs at least one bin")
        if not (counts.size == widths.size == centers.size == densities.size == nbins):
            raise ConfigError("bin arrays must all have length len(edges) - 1")
        if edges[0] <= 0 or np.any(np.diff(edges) <= 0):
            raise ConfigError("bin edges must be positive and strictly increasing")
        if np.any(densities < 0) or np.any(counts < 0) or np.any(widths < 0):
            raise ConfigError("counts, widths, and densities must be non-negative")
        for name, arr in (
            ("edges", edges),
            ("counts", counts),
            ("widths", widths),
            ("centers", centers),
            ("densities", densities),
        ):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)

    def normalization_defect(self) -> float:
        """|sum(density * width) - 1|, which is 0 for any freshly binned sample."""
        return abs(float(np.dot(self.densities, self.widths)) - 1.0)

    def check_normalization(self, tol: float = _NORMALIZATION_TOL) -> None:
        defect = self.normalization_defect()
        if defect > tol:
            raise DataError(f"unnormalized distribution: defect {defect:.3e} exceeds {tol:.1e}")


def _anchored_edges(lo: float, hi: float, bins_per_decade: int) -> np.ndarray:
    """Log grid 10**(k/bpd) covering [lo, hi] with k = 0 anchored on 1.0."""
    bpd = bins_per_decade
    k_lo = math.floor(bpd * math.log10(lo))
    while 10.0 ** ((k_lo + 1) / bpd) <= lo:
        k_lo += 1
    while 10.0 ** (k_lo / bpd) > lo:
        k_lo -= 1
    k_hi = math.ceil(bpd * math.log10(hi))
    while 10.0 ** (k_hi / bpd) <= hi:
        k_hi += 1
    return 10.0 ** (np.arange(k_lo, k_hi + 1, dtype=np.float64) / bpd)


def _lattice_counts(edges: np.ndarray) -> np.ndarray:
    """Number of integers in each half-open bin [l, r)."""
    c = np.ceil(edges)
    return np.maximum(c[1:] - c[:-1], 0.0)


def log_binned_pdf(
    data,
    bins_per_decade: int = 10,
    discrete: bool | None = None,
    data_range: tuple[float, float] | None = None,
) -> BinnedDistribution:
    """Bin a sample of intervals (or positive reals) into a log-grid density.

    Parameters
    ----------
    data : IntervalSeries or array-like of positive values.
    bins_per_decade : resolution of the base-10 log grid.
    discrete : force lattice (True) or geometric (False) bin widths;
        default infers it from the data (integer-valued => lattice).
    data_range : optional (lo, hi) to impose a common grid across related
        samples; must cover the data.
    """
    if isinstance(data, IntervalSeries):
        values = np.asarray(data.taus, dtype=np.float64)
        if discrete is None:
            discrete = True
    else:
        values = np.asarray(data, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise DataError("no intervals: nothing to bin")
    if not np.all(np.isfinite(values)) or values.min() <= 0:
        raise DataError("invalid interval: values must be positive and finite")
    if bins_per_decade < 1:
        raise ConfigError(f"bins_per_decade must be >= 1, got {bins_per_decade}")
    if discrete is None:
        discrete = bool(np.all(values == np.round(values)))

    lo, hi = float(values.min()), float(values.max())
    if data_range is not None:
        rlo, rhi = float(data_range[0]), float(data_range[1])
        if not (0 < rlo <= lo and rhi >= hi):
            raise ConfigError("data_range must be positive and cover the data")
        lo, hi = rlo, rhi
    edges = _anchored_edges(lo, hi, bins_per_decade)

    idx = np.searchsorted(edges, values, side="right") - 1
    if idx.min() < 0 or idx.max() >= edges.size - 1:
        raise DataError("invalid interval: value escaped the bin grid")  # pragma: no cover
    counts = np.bincount(idx, minlength=edges.size - 1).astype(np.int64)

    if discrete:
        widths = _lattice_counts(edges)
        first = np.ceil(edges[:-1])
        last = np.ceil(edges[1:]) - 1.0
        centers = np.where(widths > 0, 0.5 * (first + last), np.sqrt(edges[:-1] * edges[1:]))
    else:
        widths = np.diff(edges)
        centers = np.sqrt(edges[:-1] * edges[1:])

    total = int(values.size)
    densities = np.zeros_like(widths)
    occupied = counts > 0
    densities[occupied] = counts[occupied] / (total * widths[occupied])
    return BinnedDistribution(
        edges=edges,
        counts=counts,
        widths=widths,
        centers=centers,
        densities=densities,
        total=total,
        discrete=bool(discrete),
    )


def scale_distribution(dist: BinnedDistribution, mean_tau: float) -> BinnedDistribution:
    """Rescale the axes by a mean interval: x -> x / mean_tau, density -> density * mean_tau."""
    if dist.scaled:
        raise ConfigError("double scaling: distribution is already scaled")
    if not (math.isfinite(mean_tau) and mean_tau > 0):
        raise ConfigError(f"mean_tau must be positive and finite, got {mean_tau}")
    return BinnedDistribution(
        edges=dist.edges / mean_tau,
        counts=dist.counts,
        widths=dist.widths / mean_tau,
        centers=dist.centers / mean_tau,
        densities=dist.densities * mean_tau,
        total=dist.total,
        discrete=dist.discrete,
        scaled=True,
        scale_factor=float(mean_tau),
    )


def unscale_distribution(dist: BinnedDistribution) -> BinnedDistribution:
    """Invert scale_distribution."""
    if not dist.scaled:
        raise ConfigError("distribution is not scaled")
    s = dist.scale_factor
    return BinnedDistribution(
        edges=dist.edges * s,
        counts=dist.counts,
        widths=dist.widths * s,
        centers=dist.centers * s,
        densities=dist.densities / s,
        total=dist.total,
        discrete=dist.discrete,
        scaled=False,
        scale_factor=None,
    )


def _occupied_span(dist: BinnedDistribution) -> tuple[float, float]:
    occ = np.flatnonzero(dist.counts > 0)
    if occ.size == 0:
        raise DataError("no overlap: a distribution has no occupied bins")
    return float(dist.edges[occ[0]]), float(dist.edges[occ[-1] + 1])


def _rebin(dist: BinnedDistribution, target_edges: np.ndarray):
    """Project a binned density onto a new grid, preserving per-bin mass.

    Counts and probability mass are split across target bins in proportion
    to support overlap (lattice points for discrete data, length
    otherwise), so a density that was shifted away from its counts keeps
    the shift.  Returns (counts, masses, supports) per target bin.
    """
    nb = target_edges.size - 1
    counts = np.zeros(nb)
    masses = np.zeros(nb)
    supports = np.zeros(nb)
    mass_src = dist.densities * dist.widths
    tau_scale = dist.scale_factor if dist.scaled and dist.discrete else None
    for i in range(dist.n_bins):
        if dist.counts[i] == 0 and mass_src[i] == 0:
            continue
        a, b = dist.edges[i], dist.edges[i + 1]
        j_lo = max(int(np.searchsorted(target_edges, a, side="right")) - 1, 0)
        j_hi = min(int(np.searchsorted(target_edges, b, side="left")), nb)
        for j in range(j_lo, j_hi):
            u, v = target_edges[j], target_edges[j + 1]
            lo, hi = max(a, u), min(b, v)
            if hi <= lo:
                continue
            if tau_scale is not None:
                n_all = math.ceil(b * tau_scale) - math.ceil(a * tau_scale)
                n_here = math.ceil(hi * tau_scale) - math.ceil(lo * tau_scale)
                if n_all <= 0:
                    continue
                frac = n_here / n_all
                support = n_here / tau_scale
            else:
                frac = (hi - lo) / (b - a)
                support = dist.widths[i] * frac
            counts[j] += dist.counts[i] * frac
            masses[j] += mass_src[i] * frac
            supports[j] += support
    return counts, masses, supports


def collapse_quality(
    dists,
    min_count: int = 10,
    rebin_bins_per_decade: int = 2,
) -> float:
    """Worst-case disagreement between scaled curves that should coincide.

    The curves are rebinned onto a shared coarse log grid spanning their
    common occupied range; in every shared bin where each curve holds at
    least ``min_count`` counts, the spread of log-densities (max minus min)
    is taken, and the maximum spread over bins is returned.  Identical
    curves give 0; a curve offset by a factor e gives exactly 1.
    """
    dists = list(dists)
    if len(dists) < 2:
        raise ConfigError("collapse quality needs at least two distributions")
    for d in dists:
        if not d.scaled:
            raise ConfigError("collapse quality expects scaled distributions")
    spans = [_occupied_span(d) for d in dists]
    lo = max(s[0] for s in spans)
    hi = min(s[1] for s in spans)
    if lo >= hi:
        raise DataError("no overlap: occupied supports do not intersect")
    edges = _anchored_edges(lo, hi, rebin_bins_per_decade)
    # Keep only target bins fully inside the common occupied range.
    keep = (edges[:-1] >= lo * (1 - 1e-12)) & (edges[1:] <= hi * (1 + 1e-12))
    if not np.any(keep):
        raise DataError("no overlap: common range narrower than one bin")

    rebinned = [_rebin(d, edges) for d in dists]
    spread_max = -math.inf
    for j in np.flatnonzero(keep):
        ok = all(counts[j] >= min_count and supports[j] > 0 for counts, _, supports in rebinned)
        if not ok:
            continue
        logs = [math.log(masses[j] / supports[j]) for _, masses, supports in rebinned if masses[j] > 0]
        if len(logs) != len(dists):
            continue
        spread_max = max(spread_max, max(logs) - min(logs))
    if not math.isfinite(spread_max):
        raise DataError("no overlap: no shared bin meets the count floor")
    return float(spread_max)


@dataclass(frozen=True)
class StretchedExpFit:
    """Least-squares fit of log-density to ln c - alpha * x**gamma."""

    gamma: float
    alpha: float
    c: float
    fit_range: tuple[float, float]
    residual: float
    n_bins: int

    def __post_init__(self) -> None:
        if not (self.gamma > 0 and self.alpha > 0 and self.c > 0):
            raise FitError("fit produced non-positive parameters")
        if not self.fit_range[0] < self.fit_range[1]:
            raise ConfigError("fit_range must be increasing")


def _linear_subfit(x_pow: np.ndarray, y: np.ndarray):
    """Exact least squares of y ~ b0 - b1 * x_pow; returns (b0, b1, sse)."""
    n = x_pow.size
    sx = x_pow.sum()
    sxx = float(x_pow @ x_pow)
    sy = y.sum()
    sxy = float(x_pow @ y)
    det = n * sxx - sx * sx
    if det <= 0:
        return math.nan, math.nan, math.inf
    slope = (n * sxy - sx * sy) / det
    b0 = (sy - slope * sx) / n
    b1 = -slope
    resid = y - (b0 - b1 * x_pow)
    return b0, b1, float(resid @ resid)


def fit_stretched_exponential(
    dist: BinnedDistribution,
    fit_range: tuple[float, float] = (0.01, 20.0),
    min_count: int = 10,
    gamma_bounds: tuple[float, float] = (0.05, 2.0),
) -> StretchedExpFit:
    """Fit ln(density) = ln c - alpha * x**gamma over the occupied bins.

    For fixed gamma the problem is linear in (ln c, alpha) and solved
    exactly; gamma itself is found by a deterministic golden-section
    search over ``gamma_bounds``, bracketed by a coarse grid scan so a
    secondary local minimum cannot capture the search.  Bins outside
    ``fit_range`` or holding fewer than ``min_count`` counts are ignored.

    The whole procedure is deterministic: identical inputs give
    bit-identical parameters.
    """
    if not dist.scaled:
        raise ConfigError("fit expects a scaled distribution")
    x_min, x_max = float(fit_range[0]), float(fit_range[1])
    if not (0 < x_min < x_max):
        raise ConfigError(f"bad fit_range ({x_min}, {x_max})")
    mask = (
        (dist.counts >= min_count)
        & (dist.densities > 0)
        & (dist.centers >= x_min)
        & (dist.centers <= x_max)
    )
    x = dist.centers[mask]
    y = np.log(dist.densities[mask])
    if x.size < 5:
        raise FitError(f"underdetermined fit: {x.size} usable bins, need at least 5")

    g_lo, g_hi = gamma_bounds
    if not (0 < g_lo < g_hi):
        raise ConfigError(f"bad gamma bounds ({g_lo}, {g_hi})")

    def sse(g: float) -> float:
        return _linear_subfit(x**g, y)[2]

    grid = np.geomspace(g_lo, g_hi, 64)
    errs = np.array([sse(g) for g in grid])
    k = int(np.argmin(errs))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, grid.size - 1)]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c_, d_ = b - invphi * (b - a), a + invphi * (b - a)
    f_c, f_d = sse(c_), sse(d_)
    while b - a > 1e-12:
        if f_c < f_d:
            b, d_, f_d = d_, c_, f_c
            c_ = b - invphi * (b - a)
            f_c = sse(c_)
        else:
            a, c_, f_c = c_, d_, f_d
            d_ = a + invphi * (b - a)
            f_d = sse(d_)
    gamma = 0.5 * (a + b)
    b0, b1, err = _linear_subfit(x**gamma, y)
    if not (math.isfinite(b0) and b1 > 0):
        raise FitError("underdetermined fit: degenerate abscissae")
    return StretchedExpFit(
        gamma=float(gamma),
        alpha=float(b1),
        c=float(math.exp(b0)),
        fit_range=(x_min, x_max),
        residual=float(math.sqrt(err / x.size)),
        n_bins=int(x.size),
    )
