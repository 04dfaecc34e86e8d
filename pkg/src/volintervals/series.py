"""Minute bars, log-returns, and volatility normalization.

The volatility of a bar is the absolute log-return, expressed in units of
the sample standard deviation of the returns themselves, so thresholds are
scale-free: multiplying every price by a constant changes nothing
downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

GAP_POLICIES = ("drop_overnight", "keep_overnight")
NORMALIZATION_MODES = ("std", "intraday_std")


def _frozen_array(obj, name: str, values, dtype) -> None:
    arr = np.asarray(values, dtype=dtype).copy()
    arr.setflags(write=False)
    object.__setattr__(obj, name, arr)


@dataclass(frozen=True)
class MinuteBarSeries:
    """One price per trading minute, with a session id per bar.

    Timestamps are minute starts, strictly increasing; session ids are
    non-decreasing and change whenever a session (or day) boundary is
    crossed.
    """

    timestamps: np.ndarray
    prices: np.ndarray
    session_ids: np.ndarray

    def __post_init__(self) -> None:
        ts = np.asarray(self.timestamps, dtype="datetime64[s]")
        prices = np.asarray(self.prices, dtype=np.float64)
        sids = np.asarray(self.session_ids, dtype=np.int64)
        if not (ts.size == prices.size == sids.size):
            raise ConfigError("bar arrays must share one length")
        if ts.size == 0:
            raise DataError("insufficient data: empty bar series")
        if ts.size > 1 and np.any(np.diff(ts).astype(np.int64) <= 0):
            raise DataError("invalid bars: timestamps must be strictly increasing")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
            raise DataError("invalid price: prices must be positive and finite")
        if sids.size > 1 and np.any(np.diff(sids) < 0):
            raise DataError("invalid bars: session ids must be non-decreasing")
        ts = ts.copy()
        ts.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        _frozen_array(self, "prices", prices, np.float64)
        _frozen_array(self, "session_ids", sids, np.int64)

    def __len__(self) -> int:
        return int(self.prices.size)


@dataclass(frozen=True)
class ReturnSeries:
    """Log-returns, optionally annotated with bar timestamps and sessions.

    ``values[i]`` is ln(price[t]) - ln(price[t-1]) attributed to the later
    bar; ``n_gap_dropped`` records pairs severed by the gap policy.
    """

    values: np.ndarray
    timestamps: np.ndarray | None = None
    session_ids: np.ndarray | None = None
    n_gap_dropped: int = 0
    gap_policy: str = "drop_overnight"

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ConfigError("returns must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise DataError("invalid return: non-finite values")
        _frozen_array(self, "values", values, np.float64)
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype="datetime64[s]").copy()
            if ts.size != values.size:
                raise ConfigError("timestamps must align with returns")
            ts.setflags(write=False)
            object.__setattr__(self, "timestamps", ts)
        if self.session_ids is not None:
            sids = np.asarray(self.session_ids, dtype=np.int64)
            if sids.size != values.size:
                raise ConfigError("session ids must align with returns")
            _frozen_array(self, "session_ids", sids, np.int64)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class NormalizationRecord:
    """What divided the raw |return| so the transform can be audited."""

    mode: str
    sigma: float
    minute_of_day: np.ndarray | None = None
    minute_means: np.ndarray | None = None


@dataclass(frozen=True)
class VolatilitySeries:
    """Non-negative volatilities in units of the return standard deviation."""

    values: np.ndarray
    normalization: NormalizationRecord
    session_ids: np.ndarray | None = None
    timestamps: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise DataError("insufficient data: empty volatility series")
        if not np.all(np.isfinite(values)) or values.min() < 0:
            raise DataError("invalid volatility: values must be non-negative and finite")
        _frozen_array(self, "values", values, np.float64)
        if self.session_ids is not None:
            sids = np.asarray(self.session_ids, dtype=np.int64)
            if sids.size != values.size:
                raise ConfigError("session ids must align with volatility values")
            _frozen_array(self, "session_ids", sids, np.int64)

    def __len__(self) -> int:
        return int(self.values.size)


def log_returns(bars: MinuteBarSeries, gap_policy: str = "drop_overnight") -> ReturnSeries:
    """Log-returns of a bar series.

    Parameters
    ----------
    bars : MinuteBarSeries
    gap_policy : {"drop_overnight", "keep_overnight"}
        "drop_overnight" removes return pairs that straddle a session or
        day boundary (the count is reported on the result);
        "keep_overnight" keeps every consecutive pair.
    """
    if gap_policy not in GAP_POLICIES:
        raise ConfigError(f"unknown gap policy {gap_policy!r}")
    if len(bars) < 2:
        raise DataError("insufficient data: need at least 2 bars for returns")
    log_prices = np.log(bars.prices)
    diffs = np.diff(log_prices)
    ts = bars.timestamps[1:]
    sids = bars.session_ids[1:]
    if gap_policy == "drop_overnight":
        same = bars.session_ids[1:] == bars.session_ids[:-1]
        n_dropped = int(diffs.size - same.sum())
        diffs, ts, sids = diffs[same], ts[same], sids[same]
    else:
        n_dropped = 0
    if diffs.size == 0:
        raise DataError("insufficient data: no return pairs left after gap policy")
    return ReturnSeries(
        values=diffs,
        timestamps=ts,
        session_ids=sids,
        n_gap_dropped=n_dropped,
        gap_policy=gap_policy,
    )


def _population_std(values: np.ndarray) -> float:
    return float(np.sqrt(np.mean((values - values.mean()) ** 2)))


def normalize_volatility(returns: ReturnSeries, mode: str = "std") -> VolatilitySeries:
    """Turn returns into normalized absolute volatility.

    mode "std" divides |return| by the population standard deviation of
    the returns, so thresholds read in return standard deviations.  mode
    "intraday_std" first divides each return by the mean |return| at the
    same minute of day (flattening the intraday activity pattern), then
    normalizes by the standard deviation of the deflated returns; it
    requires timestamps.
    """
    if mode not in NORMALIZATION_MODES:
        raise ConfigError(f"unknown normalization mode {mode!r}")
    z = returns.values
    if z.size < 2:
        raise DataError("insufficient data: need at least 2 returns to normalize")

    if mode == "std":
        sigma = _population_std(z)
        if not sigma > 0:
            raise DataError("degenerate series: zero return variance")
        return VolatilitySeries(
            values=np.abs(z) / sigma,
            normalization=NormalizationRecord(mode=mode, sigma=sigma),
            session_ids=returns.session_ids,
            timestamps=returns.timestamps,
        )

    if returns.timestamps is None:
        raise ConfigError("intraday_std requires timestamped returns")
    day = returns.timestamps.astype("datetime64[D]")
    minute = ((returns.timestamps - day) // np.timedelta64(60, "s")).astype(np.int64)
    uniq, inverse = np.unique(minute, return_inverse=True)
    sums = np.bincount(inverse, weights=np.abs(z))
    counts = np.bincount(inverse)
    minute_means = sums / counts
    if np.any(minute_means <= 0):
        raise DataError("degenerate series: a minute of day has zero mean |return|")
    deflated = z / minute_means[inverse]
    sigma = _population_std(deflated)
    if not sigma > 0:
        raise DataError("degenerate series: zero variance after intraday deflation")
    return VolatilitySeries(
        values=np.abs(deflated) / sigma,
        normalization=NormalizationRecord(
            mode=mode, sigma=sigma, minute_of_day=uniq, minute_means=minute_means
        ),
        session_ids=returns.session_ids,
        timestamps=returns.timestamps,
    )
