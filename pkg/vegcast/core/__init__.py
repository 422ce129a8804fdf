from .errors import (VegcastError, ConfigError, DataError, InvalidValueError, InvalidInputError,
                     OutOfRangeError, ParseError, DuplicateRecordError, InsufficientClimatologyError,
                     DegenerateWeekError, UndefinedMetricError, NumericalError, ConditioningError,
                     GPFitError)
from .reasons import ReasonCode, NoForecast
from .time_grid import TimeGrid, week_of_year, SATURDAY
from .series import Quality, Sample, ObservationSeries, WeeklySeries, IndexKind, IndexSeries
from .category import DroughtCategory, categorize, is_boundary_value, ALERT_THRESHOLD, BOUNDARIES
from .alignment import align_to_grid
from .records import ForecastRecord, Method
