"""Volatility return-interval analysis.

Tools for studying the gaps between threshold exceedances in volatility
series: interval extraction, log-binned scaled distributions with
stretched-exponential fits, memory diagnostics (conditional distributions,
clustering), one-sided persistence, and seeded synthetic generators that
serve as statistical references.
"""

from .distributions import (
    BinnedDistribution,
    StretchedExpFit,
    collapse_quality,
    fit_stretched_exponential,
    log_binned_pdf,
    scale_distribution,
    unscale_distribution,
)
from .errors import ConfigError, DataError, FitError, VolIntervalsError
from .ingest import (
    SessionCalendar,
    TickFormat,
    TickRecord,
    parse_ticks,
    resample_to_minutes,
)
from .intervals import IntervalSeries, Threshold, extract_intervals, mean_interval_curve
from .memory import (
    ClusterSizeDistribution,
    MeanConditionalTable,
    cluster_size_distribution,
    conditional_pdf,
    mean_conditional_interval,
    split_by_rank,
)
from .persistence import (
    PersistenceCurve,
    PowerLawFit,
    fit_power_law,
    persistence_curve,
)
from .series import (
    MinuteBarSeries,
    NormalizationRecord,
    ReturnSeries,
    VolatilitySeries,
    log_returns,
    normalize_volatility,
)
from .synth import (
    GENERATOR_KINDS,
    GeneratorSpec,
    generate,
    parse_generator_spec,
    stretched_exp_cdf,
)

__version__ = "0.1.0"

__all__ = [
    "BinnedDistribution",
    "ClusterSizeDistribution",
    "ConfigError",
    "DataError",
    "FitError",
    "GENERATOR_KINDS",
    "GeneratorSpec",
    "IntervalSeries",
    "MeanConditionalTable",
    "MinuteBarSeries",
    "NormalizationRecord",
    "PersistenceCurve",
    "PowerLawFit",
    "ReturnSeries",
    "SessionCalendar",
    "StretchedExpFit",
    "Threshold",
    "TickFormat",
    "TickRecord",
    "VolIntervalsError",
    "VolatilitySeries",
    "cluster_size_distribution",
    "collapse_quality",
    "conditional_pdf",
    "extract_intervals",
    "fit_power_law",
    "fit_stretched_exponential",
    "generate",
    "log_binned_pdf",
    "mean_conditional_interval",
    "mean_interval_curve",
    "normalize_volatility",
    "parse_generator_spec",
    "persistence_curve",
    "scale_distribution",
    "split_by_rank",
    "stretched_exp_cdf",
    "unscale_distribution",
    "log_returns",
]
