"""Exception hierarchy for the copula toolkit."""


class TailCopulaError(Exception):
    """Base class for every error raised by copula_app."""


class DomainError(TailCopulaError, ValueError):
    """An argument lies outside the domain of a mathematical operation."""


class FitError(TailCopulaError):
    """Parameter estimation failed or produced an invalid copula parameter."""


class DegenerateSampleError(TailCopulaError, ValueError):
    """Sample too small or constant where a statistic is undefined."""


class ConfigError(TailCopulaError):
    """Unknown configuration key, wrong type or out-of-range value."""


class DataFileError(TailCopulaError):
    """Unreadable or malformed data file."""
