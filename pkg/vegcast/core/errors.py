class VegcastError(Exception):
    """
    Base class for all errors raised by vegcast.

    Attributes
    ----------
    exit_code : int
        The process exit status the command line maps this error to.
        1 = usage/config, 2 = data, 3 = numerical failure.
    """

    exit_code: int = 2


class ConfigError(VegcastError):
    """Invalid configuration or command line usage."""
    exit_code = 1


class DataError(VegcastError, ValueError):
    """Input data violates a documented contract."""
    exit_code = 2


class InvalidValueError(DataError):
    """A scalar argument is outside its domain (e.g. a non-finite VCI3M)."""


class InvalidInputError(DataError):
    """A structured input is unusable as a whole (e.g. an empty pixel set)."""


class OutOfRangeError(DataError):
    """
    Samples fall outside the span covered by a time grid.

    Attributes
    ----------
    dates : list
        The offending sample dates.
    """

    def __init__(self, message: str, dates=None):
        self.dates = list(dates or [])
        if self.dates:
            listed = ", ".join(d.isoformat() for d in self.dates[:10])
            more = f" (+{len(self.dates) - 10} more)" if len(self.dates) > 10 else ""
            message = f"{message}: {listed}{more}"
        super().__init__(message)


class ParseError(DataError):
    """
    A row of an input file could not be parsed.

    Attributes
    ----------
    line : int
        1-based line number in the file (the header is line 1).
    """

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class DuplicateRecordError(DataError):
    """The same (pixel, date) pair appears twice in an observation file."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class InsufficientClimatologyError(DataError):
    """A week of the year has too few values to build a climatology."""

    def __init__(self, week: int, count: int):
        self.week = week
        self.count = count
        super().__init__(f"week {week} has {count} present value(s), at least 2 are required")


class DegenerateWeekError(DataError):
    """A climatology week has max == min, so VCI is undefined."""

    def __init__(self, weeks):
        self.weeks = sorted(weeks)
        super().__init__(f"degenerate climatology (max == min) for week(s) {self.weeks}")


class UndefinedMetricError(DataError):
    """A skill metric cannot be computed on the given record set."""


class NumericalError(VegcastError):
    exit_code = 3


class ConditioningError(NumericalError):
    """A Gram matrix could not be factorised even with the maximum jitter."""


class GPFitError(NumericalError):
    """
    Hyperparameter optimisation failed at every restart.

    Attributes
    ----------
    best_model : GPModel | None
        The best model found before giving up, if any restart produced one.
    """

    def __init__(self, message: str, best_model=None):
        self.best_model = best_model
        super().__init__(message)
