"""Exception types shared across the toolkit.

Error messages start with a short category phrase ("corrupt input: ..."),
which the CLI surfaces in run reports and maps onto exit codes.
"""


class VolIntervalsError(Exception):
    """Base class for all toolkit errors."""

    @property
    def category(self) -> str:
        text = str(self)
        return text.split(":", 1)[0].strip() if text else type(self).__name__


class ConfigError(VolIntervalsError):
    """Invalid parameters, configuration, or usage (CLI exit code 1)."""


class DataError(VolIntervalsError):
    """Input data missing, malformed, or insufficient (CLI exit code 2)."""


class FitError(VolIntervalsError):
    """Numeric estimation failed or is underdetermined (CLI exit code 3)."""
