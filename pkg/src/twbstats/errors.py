"""Exception types shared across the package."""


class TwbStatsError(Exception):
    """Base class for all errors raised by twbstats."""


class ValidationError(TwbStatsError, ValueError):
    """A parameter is outside its allowed range.

    ``field`` names the offending parameter so front ends can report it.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class UndefinedG2Error(TwbStatsError, ZeroDivisionError):
    """g2 requested for a distribution with zero mean."""


class DegenerateInputError(TwbStatsError):
    """Data whose statistic has a zero denominator (e.g. zero total mean)."""


class DivergentStatisticError(TwbStatsError):
    """A ratio statistic whose denominator is numerically zero.

    The raw sample moments are kept so callers can still report them.
    """

    def __init__(self, message, moments=None):
        self.moments = dict(moments or {})
        super().__init__(message)


class InsufficientStatisticsError(TwbStatsError):
    def __init__(self, message, n_selected):
        self.n_selected = n_selected
        super().__init__(message)


class SingularParametersError(TwbStatsError, ZeroDivisionError):
    pass


class AmbiguousBinError(TwbStatsError, ValueError):
    """Analog value too far from any integer multiple of the gain."""


class DataFormatError(TwbStatsError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
