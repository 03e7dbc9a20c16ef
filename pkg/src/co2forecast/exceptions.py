"""Exception hierarchy.

Every error raised on purpose by the package derives from ``Co2ForecastError``
so callers (the CLI in particular) can tell user-facing failures apart from
bugs.
"""


class Co2ForecastError(Exception):
    """Base class for all package errors."""


class MalformedRow(Co2ForecastError, ValueError):
    pass


class NonHourlyStep(Co2ForecastError, ValueError):
    pass


class EmptyFile(Co2ForecastError, ValueError):
    pass


class GapTooLong(Co2ForecastError, ValueError):
    pass


class MissingAtBoundary(Co2ForecastError, ValueError):
    pass


class OutOfRange(Co2ForecastError, ValueError):
    pass


class LengthMismatch(Co2ForecastError, ValueError):
    pass


class PatchTooLong(Co2ForecastError, ValueError):
    pass


class SeriesTooShort(Co2ForecastError, ValueError):
    pass


class NoDominantPeriod(Co2ForecastError, ValueError):
    pass


class TooFewExtrema(Co2ForecastError, ValueError):
    pass


class NoImfs(Co2ForecastError, ValueError):
    pass


class NonConvergence(Co2ForecastError, RuntimeError):
    pass


class DegenerateClustering(Co2ForecastError, ValueError):
    pass


class UnknownBaseline(Co2ForecastError, KeyError):
    pass


class ZeroBaseline(Co2ForecastError, ZeroDivisionError):
    pass


class BadDuration(Co2ForecastError, ValueError):
    pass


class InsufficientSpan(Co2ForecastError, ValueError):
    pass


class ConfigError(Co2ForecastError, ValueError):
    pass

