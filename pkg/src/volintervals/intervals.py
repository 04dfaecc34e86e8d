"""Return intervals: waiting times between threshold exceedances.

An exceedance is any position where the volatility is at or above the
threshold q; the interval sequence is the series of index gaps between
consecutive exceedances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

BOUNDARY_POLICIES = ("within_series", "per_session")


@dataclass(frozen=True)
class Threshold:
    """Volatility threshold, in units of the series' own normalization."""

    q: float

    def __post_init__(self) -> None:
        if not (isinstance(self.q, (int, float, np.floating, np.integer)) and math.isfinite(self.q)):
            raise ConfigError(f"threshold must be finite, got {self.q!r}")
        if self.q < 0:
            raise ConfigError(f"threshold must be >= 0, got {self.q}")


@dataclass(frozen=True)
class IntervalSeries:
    """Ordered gaps between consecutive exceedances of one threshold.

    ``taus`` holds positive integer gaps in occurrence order; ``count`` is
    always ``n_exceedances - 1`` exceedances minus any pairs severed by the
    boundary policy.  ``warning`` is set (not raised) when fewer than two
    exceedances left nothing to measure.
    """

    taus: np.ndarray
    q: float
    n_exceedances: int
    warning: str | None = field(default=None)

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus, dtype=np.int64)
        if taus.ndim != 1:
            raise ConfigError("taus must be one-dimensional")
        if taus.size and taus.min() < 1:
            raise DataError("invalid interval: intervals must be >= 1")
        taus = taus.copy()
        taus.setflags(write=False)
        object.__setattr__(self, "taus", taus)

    @property
    def count(self) -> int:
        return int(self.taus.size)

    @property
    def mean_tau(self) -> float:
        if self.taus.size == 0:
            return math.nan
        return float(self.taus.sum() / self.taus.size)


def _as_q(q) -> float:
    if isinstance(q, Threshold):
        return float(q.q)
    return float(Threshold(q).q)


def _volatility_values(vol) -> np.ndarray:
    values = np.asarray(getattr(vol, "values", vol), dtype=np.float64)
    if values.ndim != 1:
        raise ConfigError("volatility series must be one-dimensional")
    if values.size == 0:
        raise DataError("insufficient data: empty volatility series")
    if not np.all(np.isfinite(values)):
        raise DataError("invalid volatility: non-finite values")
    return values


def extract_intervals(vol, q, boundary: str = "within_series") -> IntervalSeries:
    """Extract the interval sequence for one threshold.

    Parameters
    ----------
    vol : VolatilitySeries or array-like
        Non-negative volatility values.  A plain array is treated as an
        already-normalized series.
    q : float or Threshold
        Exceedance threshold; positions with ``vol >= q`` count as
        exceedances.
    boundary : {"within_series", "per_session"}
        "within_series" measures gaps across the whole series.
        "per_session" drops gaps that straddle a session boundary, which
        requires the input to carry per-position session ids.

    Returns
    -------
    IntervalSeries
        Empty, with a warning flag set, when fewer than two exceedances
        exist; that is data sparsity, not an error.
    """
    qv = _as_q(q)
    if boundary not in BOUNDARY_POLICIES:
        raise ConfigError(f"unknown boundary policy {boundary!r}")
    values = _volatility_values(vol)
    idx = np.flatnonzero(values >= qv)
    n_exc = int(idx.size)
    if n_exc < 2:
        return IntervalSeries(
            taus=np.empty(0, dtype=np.int64),
            q=qv,
            n_exceedances=n_exc,
            warning=f"fewer than 2 exceedances at q={qv:g} ({n_exc} found)",
        )
    taus = np.diff(idx)
    if boundary == "per_session":
        session_ids = getattr(vol, "session_ids", None)
        if session_ids is None:
            raise ConfigError("per_session boundary requires a series with session ids")
        session_ids = np.asarray(session_ids)
        if session_ids.shape != values.shape:
            raise ConfigError("session ids must align with volatility values")
        same = session_ids[idx[1:]] == session_ids[idx[:-1]]
        taus = taus[same]
        if taus.size == 0:
            return IntervalSeries(
                taus=taus,
                q=qv,
                n_exceedances=n_exc,
                warning=f"no within-session exceedance pairs at q={qv:g}",
            )
    return IntervalSeries(taus=taus, q=qv, n_exceedances=n_exc)


def mean_interval_curve(vol, qs) -> dict[float, float]:
    """Mean interval per threshold, as a map q -> mean tau.

    Thresholds with fewer than two exceedances map to NaN.  For
    homogeneous series the curve is non-decreasing in q (sparser
    exceedances sit farther apart), though pathological inputs can break
    that, so it is not asserted here.
    """
    qs = [_as_q(q) for q in qs]
    if len(qs) == 0:
        raise ConfigError("at least one threshold is required")
    if len(set(qs)) != len(qs):
        raise ConfigError("thresholds must be distinct")
    values = _volatility_values(vol)
    out: dict[float, float] = {}
    for qv in sorted(qs):
        series = extract_intervals(values, qv, boundary="within_series")
        out[qv] = series.mean_tau
    return out
