"""Tick ingestion: CSV parsing, session calendars, minute resampling.

A session calendar lists the within-day windows that actually trade
continuously (the default mirrors a two-session exchange day, 09:30-11:30
and 13:00-15:00); everything outside — call auctions, lunch, overnight —
is discarded before bars are formed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import time

import numpy as np

from .errors import ConfigError, DataError
from .series import MinuteBarSeries

FILL_POLICIES = ("carry_forward", "drop")


def _parse_hhmm(text: str) -> time:
    parts = text.strip().split(":")
    if len(parts) != 2:
        raise ConfigError(f"bad session time {text!r}, expected HH:MM")
    try:
        hh, mm = int(parts[0]), int(parts[1])
        return time(hh, mm)
    except ValueError:
        raise ConfigError(f"bad session time {text!r}, expected HH:MM") from None


@dataclass(frozen=True)
class SessionCalendar:
    """Ordered, non-overlapping half-open trading windows within a day.

    A window (start, end) covers minutes start .. end-1min, so the default
    two-window day has 120 + 120 = 240 bars.
    """

    sessions: tuple[tuple[time, time], ...]

    def __post_init__(self) -> None:
        if not self.sessions:
            raise ConfigError("calendar needs at least one session window")
        prev_end = None
        for start, end in self.sessions:
            if not (isinstance(start, time) and isinstance(end, time)):
                raise ConfigError("session bounds must be times of day")
            if start >= end:
                raise ConfigError(f"session window {start}-{end} has no duration")
            if prev_end is not None and start < prev_end:
                raise ConfigError("session windows must be ordered and non-overlapping")
            prev_end = end

    @classmethod
    def default(cls) -> "SessionCalendar":
        return cls(sessions=((time(9, 30), time(11, 30)), (time(13, 0), time(15, 0))))

    @classmethod
    def from_json(cls, path) -> "SessionCalendar":
        try:
            with open(path, encoding="utf-8") as fh:
                payload = json.load(fh)
        except OSError as exc:
            raise DataError(f"unreadable file: {path} ({exc})") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad calendar file: {path} ({exc})") from exc
        windows = payload.get("sessions") if isinstance(payload, dict) else None
        if not isinstance(windows, list) or not windows:
            raise ConfigError(f"bad calendar file: {path} needs a 'sessions' list")
        sessions = []
        for w in windows:
            if not (isinstance(w, (list, tuple)) and len(w) == 2):
                raise ConfigError(f"bad calendar file: window {w!r} must be a [start, end] pair")
            sessions.append((_parse_hhmm(w[0]), _parse_hhmm(w[1])))
        return cls(sessions=tuple(sessions))

    def minutes_per_day(self) -> int:
        total = 0
        for start, end in self.sessions:
            total += (end.hour * 60 + end.minute) - (start.hour * 60 + start.minute)
        return total

    def window_of_minute(self, minute_of_day: int) -> int | None:
        """Index of the session window containing a minute of day, else None."""
        for i, (start, end) in enumerate(self.sessions):
            if start.hour * 60 + start.minute <= minute_of_day < end.hour * 60 + end.minute:
                return i
        return None

    def session_minute_offsets(self) -> np.ndarray:
        """Minutes of day covered by the calendar, ascending."""
        chunks = [
            np.arange(s.hour * 60 + s.minute, e.hour * 60 + e.minute) for s, e in self.sessions
        ]
        return np.concatenate(chunks)


@dataclass(frozen=True)
class TickRecord:
    """One trade: timestamp, positive price, optional volume."""

    timestamp: np.datetime64
    price: float
    volume: float | None = None


@dataclass(frozen=True)
class TickFormat:
    """Column layout of a tick CSV."""

    delimiter: str = ","
    has_header: bool = True
    timestamp_col: int = 0
    price_col: int = 1
    volume_col: int | None = None


@dataclass(frozen=True)
class TickParseResult:
    records: tuple
    n_rows: int
    n_malformed: int


def _parse_timestamp(text: str) -> np.datetime64:
    text = text.strip()
    if not text:
        raise ValueError("empty timestamp")
    try:
        # Epoch seconds, possibly fractional; truncated to whole seconds.
        return np.datetime64(int(float(text)), "s")
    except ValueError:
        pass
    ts = np.datetime64(text.replace("T", " "), "s")
    if np.isnat(ts):
        raise ValueError(f"bad timestamp {text!r}")
    return ts


def parse_ticks(path, fmt: TickFormat | None = None, bad_row_tolerance: float = 0.0) -> TickParseResult:
    """Read tick records from a CSV file, tolerating a bounded bad-row fraction.

    Malformed rows (wrong field count, unparsable timestamp/price/volume,
    non-positive price) are counted and skipped; if they exceed
    ``bad_row_tolerance`` as a fraction of data rows the whole file is
    rejected as corrupt.  Output is sorted by timestamp (stable, so equal
    timestamps keep file order).
    """
    fmt = fmt or TickFormat()
    if not 0.0 <= bad_row_tolerance <= 1.0:
        raise ConfigError(f"bad_row_tolerance must be in [0, 1], got {bad_row_tolerance}")
    needed = max(
        fmt.timestamp_col, fmt.price_col, fmt.volume_col if fmt.volume_col is not None else 0
    )
    records = []
    n_rows = 0
    n_bad = 0
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, delimiter=fmt.delimiter)
            if fmt.has_header:
                next(reader, None)
            for row in reader:
                if not row or all(not cell.strip() for cell in row):
                    continue
                n_rows += 1
                if len(row) <= needed:
                    n_bad += 1
                    continue
                try:
                    ts = _parse_timestamp(row[fmt.timestamp_col])
                    price = float(row[fmt.price_col])
                    if not np.isfinite(price) or price <= 0:
                        raise ValueError("bad price")
                    volume = None
                    if fmt.volume_col is not None:
                        volume = float(row[fmt.volume_col])
                        if not np.isfinite(volume) or volume < 0:
                            raise ValueError("bad volume")
                except ValueError:
                    n_bad += 1
                    continue
                records.append(TickRecord(timestamp=ts, price=price, volume=volume))
    except OSError as exc:
        raise DataError(f"unreadable file: {path} ({exc})") from exc
    if n_rows == 0:
        raise DataError(f"corrupt input: {path} holds no data rows")
    if n_bad > bad_row_tolerance * n_rows:
        raise DataError(
            f"corrupt input: {n_bad} of {n_rows} rows malformed "
            f"(tolerance {bad_row_tolerance:.1%})"
        )
    records.sort(key=lambda r: r.timestamp)
    return TickParseResult(records=tuple(records), n_rows=n_rows, n_malformed=n_bad)


@dataclass(frozen=True)
class ResampleReport:
    n_ticks: int
    n_out_of_session: int
    n_bars: int
    n_carried: int
    n_dropped_minutes: int
    n_leading_skipped: int


def resample_to_minutes(
    ticks, calendar: SessionCalendar | None = None, fill: str = "carry_forward"
) -> tuple[MinuteBarSeries, ResampleReport]:
    """Aggregate ticks into one bar per in-session minute.

    Every bar is labeled by its minute start and priced at the last trade
    before the minute ends, so prices are never invented — a filled minute
    carries the most recent traded price forward.  fill="drop" instead
    omits minutes without a trade.  Days with no in-session ticks produce
    no bars.  Session ids number (day, window) pairs chronologically.
    """
    if fill not in FILL_POLICIES:
        raise ConfigError(f"unknown fill policy {fill!r}")
    calendar = calendar or SessionCalendar.default()
    if isinstance(ticks, TickParseResult):
        ticks = ticks.records
    ticks = list(ticks)
    if not ticks:
        raise DataError("empty after calendar filter: no ticks at all")

    secs = np.array([t.timestamp.astype("datetime64[s]").astype(np.int64) for t in ticks])
    prices = np.array([t.price for t in ticks], dtype=np.float64)
    order = np.argsort(secs, kind="stable")
    secs, prices = secs[order], prices[order]

    minute_of_day = (secs // 60) % 1440
    window = np.array([-1 if w is None else w for w in map(calendar.window_of_minute, minute_of_day)])
    in_session = window >= 0
    n_out = int((~in_session).sum())
    secs, prices = secs[in_session], prices[in_session]
    if secs.size == 0:
        raise DataError("empty after calendar filter: no in-session ticks")

    offsets = calendar.session_minute_offsets()
    window_of_offset = np.array([calendar.window_of_minute(int(m)) for m in offsets])
    days = np.unique(secs // 86400)
    # All candidate bar minutes (as epoch minutes), one block per active day.
    label_min = (days[:, None] * 1440 + offsets[None, :]).ravel()
    label_window = np.tile(window_of_offset, days.size)
    label_day = np.repeat(days, offsets.size)

    tick_minutes = secs // 60
    # Last tick strictly before each minute's end.
    idx = np.searchsorted(secs, (label_min + 1) * 60, side="left") - 1

    has_any = idx >= 0
    fresh = has_any & (tick_minutes[np.maximum(idx, 0)] == label_min)
    if fill == "carry_forward":
        keep = has_any
        n_carried = int((keep & ~fresh).sum())
        n_dropped = 0
    else:
        keep = fresh
        n_carried = 0
        n_dropped = int((has_any & ~fresh).sum())
    n_leading = int((~has_any).sum())

    label_min, label_day, label_window, idx = (
        label_min[keep],
        label_day[keep],
        label_window[keep],
        idx[keep],
    )
    if label_min.size == 0:
        raise DataError("empty after calendar filter: no bars formed")

    # Chronological (day, window) pairs -> consecutive session ids.
    pair_change = np.r_[
        True, (np.diff(label_day) != 0) | (np.diff(label_window) != 0)
    ]
    session_ids = np.cumsum(pair_change) - 1

    bars = MinuteBarSeries(
        timestamps=(label_min * 60).astype("datetime64[s]"),
        prices=prices[idx],
        session_ids=session_ids,
    )
    report = ResampleReport(
        n_ticks=len(ticks),
        n_out_of_session=n_out,
        n_bars=len(bars),
        n_carried=n_carried,
        n_dropped_minutes=n_dropped,
        n_leading_skipped=n_leading,
    )
    return bars, report
