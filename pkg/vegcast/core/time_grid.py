from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from .errors import InvalidInputError

STEP_DAYS = 7
SATURDAY = 5  # date.weekday() numbering, Monday == 0


def week_of_year(d: date) -> int:
    """
    ISO week number of a date with week 53 folded into week 52.

    Parameters
    ----------
    d : date
        The date.

    Returns
    -------
    int
        Week of the year in 1..52.
    """
    week = d.isocalendar()[1]
    return 52 if week == 53 else week


@dataclass(frozen=True)
class TimeGrid:
    """
    A regular weekly time grid.

    Slot ``i`` is dated ``start_date + 7 * i`` days and covers the 7-day window
    ``[slot_date - 6 days, slot_date]``. All slot dates share the weekday of
    ``start_date``.

    Attributes
    ----------
    start_date : date
        Date of slot 0.
    length : int
        Number of slots, at least 1.
    step_days : int
        Always 7.
    """

    start_date: date
    length: int
    step_days: int = STEP_DAYS

    def __post_init__(self):
        if self.step_days != STEP_DAYS:
            raise InvalidInputError(f"grid step must be {STEP_DAYS} days, got {self.step_days}")
        if self.length < 1:
            raise InvalidInputError(f"grid length must be >= 1, got {self.length}")
        if not isinstance(self.start_date, date):
            raise InvalidInputError(f"start_date must be a date, got {type(self.start_date).__name__}")

    @classmethod
    def covering(cls, first: date, last: date, anchor_weekday: int = SATURDAY) -> "TimeGrid":
        """
        Smallest grid anchored on ``anchor_weekday`` whose windows cover ``[first, last]``.
        """
        if last < first:
            raise InvalidInputError(f"empty date span {first} .. {last}")
        start = first + timedelta(days=(anchor_weekday - first.weekday()) % 7)
        end = last + timedelta(days=(anchor_weekday - last.weekday()) % 7)
        return cls(start, (end - start).days // STEP_DAYS + 1)

    @property
    def anchor_weekday(self) -> int:
        return self.start_date.weekday()

    @property
    def end_date(self) -> date:
        return self.slot_date(self.length - 1)

    @property
    def window_start(self) -> date:
        """First day covered by slot 0."""
        return self.start_date - timedelta(days=STEP_DAYS - 1)

    def slot_date(self, index: int) -> date:
        return self.start_date + timedelta(days=STEP_DAYS * index)

    def dates(self) -> list[date]:
        return [self.slot_date(i) for i in range(self.length)]

    def slot_of(self, d: date) -> int | None:
        """
        Index of the slot whose window contains ``d``, or None when outside the grid.
        """
        offset = (d - self.start_date).days
        index = -((-offset) // STEP_DAYS)
        if 0 <= index < self.length:
            return index
        return None

    def index_of(self, d: date) -> int:
        """
        Index of the slot dated exactly ``d``.

        Raises
        ------
        InvalidInputError
            If ``d`` is not a slot date of this grid.
        """
        offset = (d - self.start_date).days
        if offset % STEP_DAYS != 0 or not 0 <= offset // STEP_DAYS < self.length:
            raise InvalidInputError(f"{d} is not a slot date of the grid starting {self.start_date}")
        return offset // STEP_DAYS

    def weeks_since_start(self, d: date) -> float:
        """Fractional weeks between slot 0 and ``d``; slot ``i`` maps to ``i``."""
        return (d - self.start_date).days / STEP_DAYS

    def times(self) -> np.ndarray:
        """Slot positions in weeks, ``[0, 1, ..., length - 1]`` as floats."""
        return np.arange(self.length, dtype=float)

    def weeks_of_year(self) -> np.ndarray:
        return np.array([week_of_year(d) for d in self.dates()], dtype=int)

    def sub_grid(self, start: int, stop: int) -> "TimeGrid":
        """Grid made of slots ``start .. stop - 1``."""
        start = max(0, start)
        stop = min(self.length, stop)
        return TimeGrid(self.slot_date(start), stop - start)

    def offset_of(self, other: "TimeGrid") -> int:
        """Slot index in this grid of ``other``'s slot 0 (grids must share weekday)."""
        days = (other.start_date - self.start_date).days
        if days % STEP_DAYS != 0:
            raise InvalidInputError("grids are anchored on different weekdays")
        return days // STEP_DAYS
