import math
from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum

from .errors import InvalidValueError
from .series import IndexKind
from .time_grid import week_of_year


class Method(Enum):
    """
    Forecasting method that produced a record.
    """

    GP = "GP"
    AR = "AR"
    PERSISTENCE = "PERSISTENCE"

    def __str__(self):
        return self.value

    @staticmethod
    def from_string(value: str) -> "Method":
        try:
            return Method[value.strip().upper()]
        except KeyError:
            raise InvalidValueError(f"unknown method {value!r}") from None


@dataclass(frozen=True)
class ForecastRecord:
    """
    A single forecast paired with the value it turned out to be.

    Attributes
    ----------
    region_id : str
        Region the forecast is for.
    issue_date : date
        Slot date of the most recent data the forecaster could see.
    lead : int
        Lead time in weeks, at least 1.
    predicted : float
        Forecast value.
    truth : float
        Ground-truth value at ``issue_date + lead`` weeks.
    method : Method
        Which forecaster produced it.
    kind : IndexKind
        Which index was forecast.
    truth_at_issue : float | None
        Ground truth at the issue date, used to condition transition skill.
    clear_fraction : float | None
        Fraction of the region's pixels with a clear observation in the issue week.
    """

    region_id: str
    issue_date: date
    lead: int
    predicted: float
    truth: float
    method: Method
    kind: IndexKind = IndexKind.VCI3M
    truth_at_issue: float | None = None
    clear_fraction: float | None = None

    def __post_init__(self):
        if self.lead < 1:
            raise InvalidValueError(f"lead must be >= 1, got {self.lead}")
        if not (math.isfinite(self.predicted) and math.isfinite(self.truth)):
            raise InvalidValueError(
                f"record {self.region_id}/{self.issue_date}/{self.lead}: predicted and truth must be finite")

    @property
    def target_date(self) -> date:
        return self.issue_date + timedelta(weeks=self.lead)

    @property
    def target_week(self) -> int:
        return week_of_year(self.target_date)

    @property
    def error(self) -> float:
        return self.truth - self.predicted

    @property
    def key(self) -> tuple[str, date, int]:
        """Matching key used to pair records of different methods."""
        return (self.region_id, self.issue_date, self.lead)
