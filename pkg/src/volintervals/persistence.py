"""Persistence probabilities: how long a series stays strictly on one side.

For each start t', r+(t') is the number of consecutive following values
strictly greater than the value at t'; P+(t) is the fraction of eligible
starts (those with t' + t inside the series) whose run reaches at least t.
Likewise r-/P- for strictly smaller.  Runs are computed in one pass with a
monotonic stack — r+(t') ends at the next position whose value is <= the
start value — rather than by rescanning every horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, FitError

try:  # pragma: no cover - exercised implicitly by which path runs
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def _run_lengths(x):  # pragma: no cover - compiled
    n = x.size
    r_up = np.empty(n, np.int64)
    r_dn = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    top = -1
    for i in range(n - 1, -1, -1):
        while top >= 0 and x[stack[top]] > x[i]:
            top -= 1
        nxt = stack[top] if top >= 0 else n
        r_up[i] = nxt - i - 1
        top += 1
        stack[top] = i
    top = -1
    for i in range(n - 1, -1, -1):
        while top >= 0 and x[stack[top]] < x[i]:
            top -= 1
        nxt = stack[top] if top >= 0 else n
        r_dn[i] = nxt - i - 1
        top += 1
        stack[top] = i
    return r_up, r_dn


@dataclass(frozen=True)
class PersistenceCurve:
    """P+(t) and P-(t) for t = 1..t_max with per-t eligible populations."""

    t_values: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    n_starts: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t_values, dtype=np.int64)
        if t.size == 0 or t[0] != 1 or np.any(np.diff(t) != 1):
            raise ConfigError("t_values must be 1..t_max")
        for name, dtype in (
            ("t_values", np.int64),
            ("p_plus", np.float64),
            ("p_minus", np.float64),
            ("n_starts", np.int64),
        ):
            arr = np.asarray(getattr(self, name), dtype=dtype)
            if arr.size != t.size:
                raise ConfigError("curve arrays must share one length")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.p_plus < 0) or np.any(self.p_plus > 1):
            raise ConfigError("probabilities must lie in [0, 1]")
        if np.any(self.p_minus < 0) or np.any(self.p_minus > 1):
            raise ConfigError("probabilities must lie in [0, 1]")

    @property
    def t_max(self) -> int:
        return int(self.t_values[-1])


def persistence_curve(series, t_max: int) -> PersistenceCurve:
    """Empirical persistence probabilities of a real-valued series.

    Parameters
    ----------
    series : array-like of reals (an interval sequence works directly).
    t_max : largest horizon; must satisfy 1 <= t_max < len(series).
    """
    x = np.ascontiguousarray(getattr(series, "taus", series), dtype=np.float64)
    if x.ndim != 1:
        raise ConfigError("series must be one-dimensional")
    n = x.size
    if t_max < 1:
        raise ConfigError(f"t_max must be >= 1, got {t_max}")
    if t_max >= n:
        raise DataError(f"t_max too large: {t_max} >= series length {n}")
    if not np.all(np.isfinite(x)):
        raise DataError("invalid series: non-finite values")

    r_up, r_dn = _run_lengths(x)
    # survival[t] = number of starts with run >= t; a start with run >= t is
    # automatically eligible at horizon t (the run fits inside the series).
    up_counts = np.bincount(r_up, minlength=n)
    dn_counts = np.bincount(r_dn, minlength=n)
    up_surv = np.cumsum(up_counts[::-1])[::-1]
    dn_surv = np.cumsum(dn_counts[::-1])[::-1]
    t = np.arange(1, t_max + 1, dtype=np.int64)
    n_starts = n - t
    return PersistenceCurve(
        t_values=t,
        p_plus=up_surv[1 : t_max + 1] / n_starts,
        p_minus=dn_surv[1 : t_max + 1] / n_starts,
        n_starts=n_starts,
    )


@dataclass(frozen=True)
class PowerLawFit:
    """OLS fit of ln P(t) = -beta ln t + const over a horizon window."""

    sign: str
    beta: float
    r_squared: float
    fit_range: tuple[int, int]
    n_points: int

    def __post_init__(self) -> None:
        if self.sign not in ("+", "-"):
            raise ConfigError(f"sign must be '+' or '-', got {self.sign!r}")
        if not self.fit_range[0] < self.fit_range[1]:
            raise ConfigError("fit_range must be increasing")


def fit_power_law(
    curve: PersistenceCurve,
    sign: str = "+",
    fit_range: tuple[int, int] = (4, 100),
) -> PowerLawFit:
    """Estimate the decay exponent of one persistence branch.

    Ordinary least squares of ln P against ln t over horizons inside
    ``fit_range`` with P > 0; beta is the negated slope.
    """
    if sign == "+":
        p = curve.p_plus
    elif sign == "-":
        p = curve.p_minus
    else:
        raise ConfigError(f"sign must be '+' or '-', got {sign!r}")
    t_lo, t_hi = int(fit_range[0]), int(fit_range[1])
    if not 1 <= t_lo < t_hi:
        raise ConfigError(f"bad fit_range ({t_lo}, {t_hi})")
    t = curve.t_values
    mask = (t >= t_lo) & (t <= t_hi) & (p > 0)
    if int(mask.sum()) < 5:
        raise FitError(f"underdetermined fit: {int(mask.sum())} usable points, need at least 5")
    lx = np.log(t[mask].astype(np.float64))
    ly = np.log(p[mask])
    lxm = lx - lx.mean()
    slope = float(lxm @ ly) / float(lxm @ lxm)
    resid = ly - (slope * lx + (ly.mean() - slope * lx.mean()))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    beta = -slope
    if not math.isfinite(beta):
        raise FitError("underdetermined fit: degenerate points")
    return PowerLawFit(
        sign=sign,
        beta=beta,
        r_squared=r2,
        fit_range=(t_lo, t_hi),
        n_points=int(mask.sum()),
    )
