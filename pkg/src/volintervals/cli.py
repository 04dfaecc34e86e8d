"""Command-line interface and pipeline orchestration.

Every stage reads and writes plain CSV/JSON artifacts, so the pipeline can
be re-run piecemeal: ``intervals`` on a price or value series, ``pdf`` on
an interval file, ``fit`` on a binned distribution, and so on.  The
``pipeline`` subcommand chains everything and writes a run report whose
config echo is sufficient to reproduce the run (``pipeline --config
report.json``).

Exit codes: 0 success, 1 configuration error, 2 data error, 3 numeric or
fit failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _io
from .distributions import (
    BinnedDistribution,
    collapse_quality,
    fit_stretched_exponential,
    log_binned_pdf,
    scale_distribution,
)
from .errors import ConfigError, DataError, FitError, VolIntervalsError
from .ingest import SessionCalendar, TickFormat, parse_ticks, resample_to_minutes
from .intervals import IntervalSeries, extract_intervals
from .memory import cluster_size_distribution, conditional_pdf, mean_conditional_interval
from .persistence import fit_power_law, persistence_curve
from .series import MinuteBarSeries, ReturnSeries, log_returns, normalize_volatility
from .synth import GeneratorSpec, generate, parse_generator_spec

OUT_DIR_ENV = "VOLINTERVALS_OUT"

_EXIT_CODES = {ConfigError: 1, DataError: 2, FitError: 3}


def _exit_code(exc: VolIntervalsError) -> int:
    for cls, code in _EXIT_CODES.items():
        if isinstance(exc, cls):
            return code
    return 3


def _qtag(q: float) -> str:
    return format(q, "g")


def _parse_range(text: str, kind: type):
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ConfigError(f"bad range {text!r}, expected LO:HI")
    try:
        return kind(lo), kind(hi)
    except ValueError:
        raise ConfigError(f"bad range {text!r}, expected numeric LO:HI") from None


# ---------------------------------------------------------------------------
# Artifact writers/readers


def write_series_csv(path, values, comments) -> None:
    _io.write_csv(path, ["value"], ((v,) for v in values), comments=comments)


def read_series_csv(path) -> np.ndarray:
    comments, header, rows = _io.read_csv(path)
    if header != ["value"]:
        raise DataError(f"corrupt input: {path} is not a value series")
    try:
        return np.array([float(r[0]) for r in rows], dtype=np.float64)
    except (ValueError, IndexError) as exc:
        raise DataError(f"corrupt input: {path} has a bad value row ({exc})") from None


def write_bars_csv(path, bars: MinuteBarSeries) -> None:
    rows = (
        (np.datetime_as_string(ts, unit="s"), price, sid)
        for ts, price, sid in zip(bars.timestamps, bars.prices, bars.session_ids)
    )
    _io.write_csv(path, ["timestamp", "price", "session_id"], rows)


def read_bars_csv(path) -> MinuteBarSeries:
    comments, header, rows = _io.read_csv(path)
    if header != ["timestamp", "price", "session_id"]:
        raise DataError(f"corrupt input: {path} is not a bar series")
    try:
        ts = np.array([r[0] for r in rows], dtype="datetime64[s]")
        prices = np.array([float(r[1]) for r in rows])
        sids = np.array([int(r[2]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise DataError(f"corrupt input: {path} has a bad bar row ({exc})") from None
    return MinuteBarSeries(timestamps=ts, prices=prices, session_ids=sids)


def write_intervals_csv(path, series: IntervalSeries, boundary: str) -> None:
    comments = [
        f"q={_io.fmt_float(series.q)}",
        f"n_exceedances={series.n_exceedances}",
        f"mean_tau={_io.fmt_float(series.mean_tau)}",
        f"boundary={boundary}",
    ]
    if series.warning:
        comments.append(f"warning={series.warning}")
    _io.write_csv(path, ["tau"], ((t,) for t in series.taus), comments=comments)


def read_intervals_csv(path) -> IntervalSeries:
    comments, header, rows = _io.read_csv(path)
    if header != ["tau"]:
        raise DataError(f"corrupt input: {path} is not an interval series")
    try:
        taus = np.array([int(r[0]) for r in rows], dtype=np.int64)
        q = float(comments.get("q", "nan"))
        n_exc = int(comments.get("n_exceedances", max(taus.size + 1, 0)))
    except (ValueError, IndexError) as exc:
        raise DataError(f"corrupt input: {path} has a bad interval row ({exc})") from None
    return IntervalSeries(
        taus=taus, q=q, n_exceedances=n_exc, warning=comments.get("warning") or None
    )


def write_pdf_csv(path, dist: BinnedDistribution, scaled: BinnedDistribution) -> None:
    comments = [
        f"mean_tau={_io.fmt_float(scaled.scale_factor)}",
        f"total={dist.total}",
        f"discrete={'true' if dist.discrete else 'false'}",
    ]
    rows = zip(
        dist.edges[:-1],
        dist.edges[1:],
        dist.counts,
        dist.densities,
        scaled.centers,
        scaled.densities,
    )
    _io.write_csv(
        path,
        ["bin_left", "bin_right", "count", "density", "scaled_x", "scaled_density"],
        rows,
        comments=comments,
    )


def read_pdf_csv(path) -> BinnedDistribution:
    """Rebuild the scaled distribution from a pdf artifact."""
    comments, header, rows = _io.read_csv(path)
    expected = ["bin_left", "bin_right", "count", "density", "scaled_x", "scaled_density"]
    if header != expected:
        raise DataError(f"corrupt input: {path} is not a binned distribution")
    try:
        mean_tau = float(comments["mean_tau"])
        discrete = comments.get("discrete", "false") == "true"
        data = np.array([[float(c) for c in r] for r in rows])
    except (KeyError, ValueError) as exc:
        raise DataError(f"corrupt input: {path} has a bad distribution row ({exc})") from None
    if data.size == 0:
        raise DataError(f"corrupt input: {path} holds no bins")
    counts = data[:, 2].astype(np.int64)
    total = int(counts.sum())
    scaled_density = data[:, 5]
    widths = np.zeros(counts.size)
    occupied = (counts > 0) & (scaled_density > 0)
    widths[occupied] = counts[occupied] / (total * scaled_density[occupied])
    return BinnedDistribution(
        edges=np.append(data[:, 0], data[-1, 1]) / mean_tau,
        counts=counts,
        widths=widths,
        centers=data[:, 4],
        densities=scaled_density,
        total=total,
        discrete=discrete,
        scaled=True,
        scale_factor=mean_tau,
    )


def _fit_payload(fit) -> dict:
    return {
        "gamma": fit.gamma,
        "alpha": fit.alpha,
        "c": fit.c,
        "residual": fit.residual,
        "fit_range": list(fit.fit_range),
        "n_bins": fit.n_bins,
    }


def write_conditional_pdf_csv(path, subsets: dict) -> None:
    rows = []
    for name in ("lower", "upper"):
        dist = subsets.get(name)
        if dist is None:
            continue
        for x, d, c in zip(dist.centers, dist.densities, dist.counts):
            rows.append((name, x, d, c))
    _io.write_csv(path, ["subset", "scaled_x", "scaled_density", "count"], rows)


def write_conditional_mean_csv(path, table) -> None:
    comments = [
        f"k_bins={table.k_bins}",
        f"n_shuffles={table.n_shuffles}",
        f"seed={table.seed}",
    ]
    rows = zip(
        table.bin_centers, table.means, table.shuffle_means, table.shuffle_stds, table.n_successors
    )
    _io.write_csv(
        path,
        ["bin_center_scaled", "mean_scaled", "shuffle_mean", "shuffle_std", "n"],
        rows,
        comments=comments,
    )


def write_clusters_csv(path, plus, minus) -> None:
    rows = []
    for dist in (plus, minus):
        counts_ge = (dist.cumulative * dist.n_clusters).round().astype(np.int64)
        for n, cum, cnt in zip(dist.sizes, dist.cumulative, counts_ge):
            rows.append((dist.sign, int(n), cum, int(cnt)))
    _io.write_csv(
        path,
        ["sign", "n", "cumulative", "cluster_count"],
        rows,
        comments=["cluster_count = clusters of size >= n"],
    )


def write_persistence_csv(path, curve) -> None:
    rows = zip(curve.t_values, curve.p_plus, curve.p_minus, curve.n_starts)
    _io.write_csv(path, ["t", "p_plus", "p_minus", "n_starts"], rows)


# ---------------------------------------------------------------------------
# Pipeline


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one pipeline run."""

    out_dir: str
    input: str | None = None
    input_kind: str | None = None  # "ticks" | "bars" | "series"; None = sniff
    generator: str | None = None
    calendar: str | None = None
    qs: tuple[float, ...] = (1.0,)
    norm: str = "std"
    gap: str = "drop_overnight"
    boundary: str = "within_series"
    fill: str = "carry_forward"
    delimiter: str = ","
    no_header: bool = False
    bad_row_tolerance: float = 0.0
    bins_per_decade: int = 10
    fit_range: tuple[float, float] = (0.01, 20.0)
    k_bins: int = 8
    shuffles: int = 20
    t_max: int = 100
    persistence_fit_range: tuple[int, int] = (4, 100)
    seed: int = 0
    workers: int = 1
    dump_series: bool = True

    def __post_init__(self) -> None:
        if (self.input is None) == (self.generator is None):
            raise ConfigError("exactly one of input file or generator spec is required")
        if not self.qs:
            raise ConfigError("at least one threshold is required")
        if len(set(self.qs)) != len(self.qs):
            raise ConfigError("thresholds must be distinct")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def to_dict(self) -> dict:
        return {
            "out_dir": self.out_dir,
            "input": self.input,
            "input_kind": self.input_kind,
            "generator": self.generator,
            "calendar": self.calendar,
            "qs": list(self.qs),
            "norm": self.norm,
            "gap": self.gap,
            "boundary": self.boundary,
            "fill": self.fill,
            "delimiter": self.delimiter,
            "no_header": self.no_header,
            "bad_row_tolerance": self.bad_row_tolerance,
            "bins_per_decade": self.bins_per_decade,
            "fit_range": list(self.fit_range),
            "k_bins": self.k_bins,
            "shuffles": self.shuffles,
            "t_max": self.t_max,
            "persistence_fit_range": list(self.persistence_fit_range),
            "seed": self.seed,
            "workers": self.workers,
            "dump_series": self.dump_series,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RunConfig":
        if not isinstance(payload, dict):
            raise ConfigError("config must be a JSON object")
        config = dict(payload)
        config.pop("version", None)
        for key in ("qs",):
            if key in config and config[key] is not None:
                config[key] = tuple(float(q) for q in config[key])
        for key in ("fit_range", "persistence_fit_range"):
            if key in config and config[key] is not None:
                lo, hi = config[key]
                config[key] = (type(getattr(cls, key, (0.0, 0.0))[0])(lo), type(getattr(cls, key, (0.0, 0.0))[1])(hi))
        known = set(cls.__dataclass_fields__)
        unknown = set(config) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**config)
        except TypeError as exc:
            raise ConfigError(f"bad config: {exc}") from None


def _sniff_kind(path) -> str:
    comments, header, _ = _io.read_csv(path)
    if header == ["timestamp", "price", "session_id"]:
        return "bars"
    if header == ["value"]:
        return "series"
    return "ticks"


def _load_volatility(config: RunConfig, out_dir: str, report: dict):
    """Resolve the configured source into a volatility series."""
    t0 = time.perf_counter()
    source: dict = {}
    if config.generator is not None:
        spec = parse_generator_spec(config.generator)
        values = generate(spec)
        source = {"type": "generator", "spec": spec.params(), "n_values": int(values.size)}
        if config.dump_series:
            path = os.path.join(out_dir, "series.csv")
            write_series_csv(
                path, values, [f"{k}={v}" for k, v in spec.params().items()]
            )
            source["file"] = "series.csv"
        vol = values
    else:
        kind = config.input_kind or _sniff_kind(config.input)
        if kind == "ticks":
            calendar = (
                SessionCalendar.from_json(config.calendar)
                if config.calendar
                else SessionCalendar.default()
            )
            fmt = TickFormat(delimiter=config.delimiter, has_header=not config.no_header)
            parsed = parse_ticks(config.input, fmt, bad_row_tolerance=config.bad_row_tolerance)
            bars, resample_report = resample_to_minutes(parsed.records, calendar, fill=config.fill)
            bars_path = os.path.join(out_dir, "bars.csv")
            write_bars_csv(bars_path, bars)
            source = {
                "type": "ticks",
                "file": config.input,
                "n_rows": parsed.n_rows,
                "n_malformed": parsed.n_malformed,
                "n_out_of_session": resample_report.n_out_of_session,
                "n_bars": resample_report.n_bars,
                "bars_file": "bars.csv",
            }
        elif kind == "bars":
            bars = read_bars_csv(config.input)
            source = {"type": "bars", "file": config.input, "n_bars": len(bars)}
        elif kind == "series":
            values = read_series_csv(config.input)
            source = {"type": "series", "file": config.input, "n_values": int(values.size)}
            report["source"] = source
            report.setdefault("timings_s", {})["source"] = time.perf_counter() - t0
            return values, source
        else:
            raise ConfigError(f"unknown input kind {kind!r}")
        returns = log_returns(bars, gap_policy=config.gap)
        source["n_returns"] = len(returns)
        source["n_gap_dropped"] = returns.n_gap_dropped
        vol_series = normalize_volatility(returns, mode=config.norm)
        source["normalization"] = {
            "mode": config.norm,
            "sigma": vol_series.normalization.sigma,
        }
        vol = vol_series
    report["source"] = source
    report.setdefault("timings_s", {})["source"] = time.perf_counter() - t0
    return vol, source


def _threshold_stage(vol, q: float, config: RunConfig, out_dir: str) -> dict:
    tag = _qtag(q)
    entry: dict = {"q": q, "files": {}}
    warnings_list: list[str] = []

    series = extract_intervals(vol, q, boundary=config.boundary)
    path = os.path.join(out_dir, f"intervals_q{tag}.csv")
    write_intervals_csv(path, series, config.boundary)
    entry["files"]["intervals"] = os.path.basename(path)
    entry["n_exceedances"] = series.n_exceedances
    entry["n_intervals"] = series.count
    entry["mean_tau"] = series.mean_tau
    if series.warning:
        warnings_list.append(series.warning)
    if series.count == 0:
        entry["warnings"] = warnings_list
        return entry

    dist = log_binned_pdf(series, bins_per_decade=config.bins_per_decade)
    scaled = scale_distribution(dist, series.mean_tau)
    path = os.path.join(out_dir, f"pdf_q{tag}.csv")
    write_pdf_csv(path, dist, scaled)
    entry["files"]["pdf"] = os.path.basename(path)
    entry["_scaled_dist"] = scaled

    try:
        fit = fit_stretched_exponential(scaled, fit_range=config.fit_range)
        entry["fit"] = _fit_payload(fit)
        path = os.path.join(out_dir, f"fit_q{tag}.json")
        _io.write_json(path, _fit_payload(fit))
        entry["files"]["fit"] = os.path.basename(path)
    except FitError as exc:
        entry["fit"] = None
        warnings_list.append(f"fit skipped at q={tag}: {exc}")

    try:
        subsets = conditional_pdf(series, bins_per_decade=config.bins_per_decade)
        path = os.path.join(out_dir, f"conditional_pdf_q{tag}.csv")
        write_conditional_pdf_csv(path, subsets)
        entry["files"]["conditional_pdf"] = os.path.basename(path)
    except (DataError, ConfigError) as exc:
        warnings_list.append(f"conditional pdf skipped at q={tag}: {exc}")

    try:
        table = mean_conditional_interval(
            series, k_bins=config.k_bins, n_shuffles=config.shuffles, seed=config.seed
        )
        path = os.path.join(out_dir, f"conditional_mean_q{tag}.csv")
        write_conditional_mean_csv(path, table)
        entry["files"]["conditional_mean"] = os.path.basename(path)
    except (DataError, ConfigError) as exc:
        warnings_list.append(f"conditional mean skipped at q={tag}: {exc}")

    try:
        plus, minus = cluster_size_distribution(series)
        path = os.path.join(out_dir, f"clusters_q{tag}.csv")
        write_clusters_csv(path, plus, minus)
        entry["files"]["clusters"] = os.path.basename(path)
    except DataError as exc:
        warnings_list.append(f"clusters skipped at q={tag}: {exc}")

    t_max = min(config.t_max, series.count - 1)
    if t_max >= 1:
        curve = persistence_curve(series.taus, t_max)
        path = os.path.join(out_dir, f"persistence_q{tag}.csv")
        write_persistence_csv(path, curve)
        entry["files"]["persistence"] = os.path.basename(path)
        fits = []
        for sign in ("+", "-"):
            try:
                pfit = fit_power_law(curve, sign=sign, fit_range=config.persistence_fit_range)
                fits.append(
                    {
                        "sign": sign,
                        "beta": pfit.beta,
                        "r_squared": pfit.r_squared,
                        "fit_range": list(pfit.fit_range),
                    }
                )
            except FitError as exc:
                warnings_list.append(f"persistence fit ({sign}) skipped at q={tag}: {exc}")
        if fits:
            path = os.path.join(out_dir, f"persistence_fit_q{tag}.json")
            _io.write_json(path, fits)
            entry["files"]["persistence_fit"] = os.path.basename(path)
            entry["persistence_fits"] = fits
    else:
        warnings_list.append(f"persistence skipped at q={tag}: too few intervals")

    entry["warnings"] = warnings_list
    return entry


def run_pipeline(config: RunConfig) -> dict:
    """Run every stage for every threshold; returns the run report dict.

    The report is also written to ``<out_dir>/report.json``, including on
    failure, where it names the failing stage and error category.
    """
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    report: dict = {"config": config.to_dict(), "timings_s": {}}
    t_start = time.perf_counter()
    stage = "ingest"
    try:
        vol, _source = _load_volatility(config, out_dir, report)

        stage = "thresholds"
        t0 = time.perf_counter()
        qs = sorted(config.qs)
        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                entries = list(pool.map(lambda q: _threshold_stage(vol, q, config, out_dir), qs))
        else:
            entries = [_threshold_stage(vol, q, config, out_dir) for q in qs]
        report["timings_s"]["thresholds"] = time.perf_counter() - t0

        scaled_dists = [e.pop("_scaled_dist") for e in entries if "_scaled_dist" in e]
        report["thresholds"] = {_qtag(e["q"]): e for e in entries}

        stage = "collapse"
        if len(scaled_dists) >= 2:
            try:
                report["collapse_quality"] = collapse_quality(scaled_dists)
            except (DataError, ConfigError) as exc:
                report["collapse_quality"] = None
                report.setdefault("warnings", []).append(f"collapse skipped: {exc}")
        else:
            report["collapse_quality"] = None

        report["warnings"] = report.get("warnings", []) + [
            w for e in entries for w in e.get("warnings", [])
        ]
        report["exit"] = {"status": "ok"}
    except VolIntervalsError as exc:
        report["exit"] = {
            "status": "error",
            "stage": stage,
            "category": exc.category,
            "message": str(exc),
        }
        report["timings_s"]["total"] = time.perf_counter() - t_start
        _io.write_json(os.path.join(out_dir, "report.json"), report)
        raise
    report["timings_s"]["total"] = time.perf_counter() - t_start
    _io.write_json(os.path.join(out_dir, "report.json"), report)
    return report


# ---------------------------------------------------------------------------
# Subcommand handlers


def _default_out() -> str:
    return os.environ.get(OUT_DIR_ENV, ".")


def _cmd_ingest(args) -> int:
    calendar = SessionCalendar.from_json(args.calendar) if args.calendar else SessionCalendar.default()
    fmt = TickFormat(delimiter=args.delimiter, has_header=not args.no_header)
    parsed = parse_ticks(args.input, fmt, bad_row_tolerance=args.bad_row_tolerance)
    bars, report = resample_to_minutes(parsed.records, calendar, fill=args.fill)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "bars.csv")
    write_bars_csv(path, bars)
    print(
        f"ingest: {parsed.n_rows} rows ({parsed.n_malformed} malformed, "
        f"{report.n_out_of_session} out of session) -> {report.n_bars} bars -> {path}"
    )
    return 0


def _cmd_synth(args) -> int:
    spec = parse_generator_spec(args.generator)
    values = generate(spec)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "series.csv")
    write_series_csv(path, values, [f"{k}={v}" for k, v in spec.params().items()])
    print(f"synth: {spec.kind} length={spec.length} seed={spec.seed} -> {path}")
    return 0


def _volatility_from_file(path, norm: str, gap: str):
    kind = _sniff_kind(path)
    if kind == "series":
        return read_series_csv(path)
    if kind == "bars":
        bars = read_bars_csv(path)
        return normalize_volatility(log_returns(bars, gap_policy=gap), mode=norm)
    raise DataError(f"corrupt input: {path} is neither a bar series nor a value series")


def _cmd_intervals(args) -> int:
    vol = _volatility_from_file(args.input, args.norm, args.gap)
    os.makedirs(args.out, exist_ok=True)
    for q in args.q:
        series = extract_intervals(vol, q, boundary=args.boundary)
        path = os.path.join(args.out, f"intervals_q{_qtag(q)}.csv")
        write_intervals_csv(path, series, args.boundary)
        note = f" ({series.warning})" if series.warning else ""
        print(f"intervals: q={_qtag(q)} -> {series.count} intervals{note} -> {path}")
    return 0


def _cmd_pdf(args) -> int:
    series = read_intervals_csv(args.input)
    dist = log_binned_pdf(series, bins_per_decade=args.bins_per_decade)
    scaled = scale_distribution(dist, series.mean_tau)
    os.makedirs(args.out, exist_ok=True)
    tag = _qtag(series.q) if math.isfinite(series.q) else "x"
    path = os.path.join(args.out, f"pdf_q{tag}.csv")
    write_pdf_csv(path, dist, scaled)
    print(f"pdf: {dist.total} intervals over {dist.n_bins} bins -> {path}")
    return 0


def _cmd_fit(args) -> int:
    dist = read_pdf_csv(args.input)
    fit = fit_stretched_exponential(dist, fit_range=args.fit_range)
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.input))[0]
    path = os.path.join(args.out, f"fit_{stem}.json")
    _io.write_json(path, _fit_payload(fit))
    print(
        f"fit: gamma={fit.gamma:.4g} alpha={fit.alpha:.4g} c={fit.c:.4g} "
        f"residual={fit.residual:.3g} ({fit.n_bins} bins) -> {path}"
    )
    return 0


def _cmd_conditional_pdf(args) -> int:
    series = read_intervals_csv(args.input)
    subsets = conditional_pdf(series, bins_per_decade=args.bins_per_decade)
    os.makedirs(args.out, exist_ok=True)
    tag = _qtag(series.q) if math.isfinite(series.q) else "x"
    path = os.path.join(args.out, f"conditional_pdf_q{tag}.csv")
    write_conditional_pdf_csv(path, subsets)
    print(f"conditional-pdf: subsets {sorted(subsets)} -> {path}")
    return 0


def _cmd_conditional_mean(args) -> int:
    series = read_intervals_csv(args.input)
    table = mean_conditional_interval(
        series, k_bins=args.k_bins, n_shuffles=args.shuffles, seed=args.seed
    )
    os.makedirs(args.out, exist_ok=True)
    tag = _qtag(series.q) if math.isfinite(series.q) else "x"
    path = os.path.join(args.out, f"conditional_mean_q{tag}.csv")
    write_conditional_mean_csv(path, table)
    print(f"conditional-mean: {table.k_bins} bins, {table.n_shuffles} shuffles -> {path}")
    return 0


def _cmd_clusters(args) -> int:
    series = read_intervals_csv(args.input)
    plus, minus = cluster_size_distribution(series)
    os.makedirs(args.out, exist_ok=True)
    tag = _qtag(series.q) if math.isfinite(series.q) else "x"
    path = os.path.join(args.out, f"clusters_q{tag}.csv")
    write_clusters_csv(path, plus, minus)
    print(
        f"clusters: {plus.n_clusters} '+' clusters (max {plus.max_size}), "
        f"{minus.n_clusters} '-' clusters (max {minus.max_size}) -> {path}"
    )
    return 0


def _cmd_persistence(args) -> int:
    series = read_intervals_csv(args.input)
    t_max = min(args.t_max, series.count - 1)
    if t_max < 1:
        raise DataError("t_max too large: need at least 2 intervals")
    curve = persistence_curve(series.taus, t_max)
    os.makedirs(args.out, exist_ok=True)
    tag = _qtag(series.q) if math.isfinite(series.q) else "x"
    path = os.path.join(args.out, f"persistence_q{tag}.csv")
    write_persistence_csv(path, curve)
    fits = []
    for sign in ("+", "-"):
        try:
            pfit = fit_power_law(curve, sign=sign, fit_range=args.fit_range)
            fits.append(
                {
                    "sign": sign,
                    "beta": pfit.beta,
                    "r_squared": pfit.r_squared,
                    "fit_range": list(pfit.fit_range),
                }
            )
            print(f"persistence: sign={sign} beta={pfit.beta:.4g} r2={pfit.r_squared:.4g}")
        except FitError as exc:
            print(f"persistence: sign={sign} fit skipped ({exc})")
    if fits:
        _io.write_json(os.path.join(args.out, f"persistence_fit_q{tag}.json"), fits)
    print(f"persistence: curve to t={t_max} -> {path}")
    return 0


def _cmd_pipeline(args) -> int:
    if args.config:
        payload = _io.read_json(args.config)
        payload = payload.get("config", payload)
        if args.out != _default_out():
            payload["out_dir"] = args.out
        config = RunConfig.from_dict(payload)
    else:
        if (args.input is None) == (args.generator is None):
            raise ConfigError("exactly one of --input or --generator is required")
        config = RunConfig(
            out_dir=args.out,
            input=args.input,
            generator=args.generator,
            calendar=args.calendar,
            qs=tuple(args.q) if args.q else (1.0,),
            norm=args.norm,
            gap=args.gap,
            boundary=args.boundary,
            fill=args.fill,
            delimiter=args.delimiter,
            no_header=args.no_header,
            bad_row_tolerance=args.bad_row_tolerance,
            bins_per_decade=args.bins_per_decade,
            fit_range=args.fit_range,
            k_bins=args.k_bins,
            shuffles=args.shuffles,
            t_max=args.t_max,
            persistence_fit_range=args.persistence_fit_range,
            seed=args.seed,
            workers=args.workers,
        )
    report = run_pipeline(config)
    n_q = len(report.get("thresholds", {}))
    print(f"pipeline: {n_q} thresholds -> {os.path.join(config.out_dir, 'report.json')}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise ConfigError(f"bad arguments: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="volintervals", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", default=_default_out(), help="output directory")

    p = sub.add_parser("ingest", help="parse ticks and resample to minute bars")
    p.add_argument("--input", required=True)
    p.add_argument("--calendar", default=None, help="JSON file with session windows")
    p.add_argument("--fill", default="carry_forward", choices=["carry_forward", "drop"])
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--bad-row-tolerance", type=float, default=0.0)
    add_out(p)

    p = sub.add_parser("synth", help="generate a synthetic series")
    p.add_argument("--generator", required=True, help="kind:key=value,... spec")
    add_out(p)

    p = sub.add_parser("intervals", help="extract exceedance intervals")
    p.add_argument("--input", required=True, help="bars.csv or a value series")
    p.add_argument("--q", type=float, action="append", required=True)
    p.add_argument("--norm", default="std", choices=["std", "intraday_std"])
    p.add_argument("--gap", default="drop_overnight", choices=["drop_overnight", "keep_overnight"])
    p.add_argument("--boundary", default="within_series", choices=["within_series", "per_session"])
    add_out(p)

    p = sub.add_parser("pdf", help="log-binned interval distribution")
    p.add_argument("--input", required=True, help="intervals CSV")
    p.add_argument("--bins-per-decade", type=int, default=10)
    add_out(p)

    p = sub.add_parser("fit", help="stretched-exponential fit of a distribution")
    p.add_argument("--input", required=True, help="pdf CSV")
    p.add_argument(
        "--fit-range",
        type=lambda s: _parse_range(s, float),
        default=(0.01, 20.0),
        help="scaled-x range LO:HI",
    )
    add_out(p)

    p = sub.add_parser("conditional-pdf", help="successor distributions by predecessor half")
    p.add_argument("--input", required=True, help="intervals CSV")
    p.add_argument("--bins-per-decade", type=int, default=10)
    add_out(p)

    p = sub.add_parser("conditional-mean", help="mean successor interval by predecessor bin")
    p.add_argument("--input", required=True, help="intervals CSV")
    p.add_argument("--k-bins", type=int, default=8)
    p.add_argument("--shuffles", type=int, default=20)
    p.add_argument("--seed", type=int, required=True)
    add_out(p)

    p = sub.add_parser("clusters", help="cluster sizes of the above/below-median sequence")
    p.add_argument("--input", required=True, help="intervals CSV")
    add_out(p)

    p = sub.add_parser("persistence", help="one-sided persistence of the interval sequence")
    p.add_argument("--input", required=True, help="intervals CSV")
    p.add_argument("--t-max", type=int, default=100)
    p.add_argument(
        "--fit-range", type=lambda s: _parse_range(s, int), default=(4, 100), help="horizon range LO:HI"
    )
    add_out(p)

    p = sub.add_parser("pipeline", help="run every stage and write a report")
    p.add_argument("--config", default=None, help="re-run from a report or config JSON")
    p.add_argument("--input", default=None)
    p.add_argument("--generator", default=None)
    p.add_argument("--calendar", default=None)
    p.add_argument("--q", type=float, action="append")
    p.add_argument("--norm", default="std", choices=["std", "intraday_std"])
    p.add_argument("--gap", default="drop_overnight", choices=["drop_overnight", "keep_overnight"])
    p.add_argument("--boundary", default="within_series", choices=["within_series", "per_session"])
    p.add_argument("--fill", default="carry_forward", choices=["carry_forward", "drop"])
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--bad-row-tolerance", type=float, default=0.0)
    p.add_argument("--bins-per-decade", type=int, default=10)
    p.add_argument("--fit-range", type=lambda s: _parse_range(s, float), default=(0.01, 20.0))
    p.add_argument("--k-bins", type=int, default=8)
    p.add_argument("--shuffles", type=int, default=20)
    p.add_argument("--t-max", type=int, default=100)
    p.add_argument(
        "--persistence-fit-range", type=lambda s: _parse_range(s, int), default=(4, 100)
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    add_out(p)

    return parser


_HANDLERS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "intervals": _cmd_intervals,
    "pdf": _cmd_pdf,
    "fit": _cmd_fit,
    "conditional-pdf": _cmd_conditional_pdf,
    "conditional-mean": _cmd_conditional_mean,
    "clusters": _cmd_clusters,
    "persistence": _cmd_persistence,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except VolIntervalsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
