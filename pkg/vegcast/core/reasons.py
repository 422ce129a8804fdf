from dataclasses import dataclass
from enum import Enum


class ReasonCode(Enum):
    """
    Machine-parseable reason codes attached to skipped work and soft failures.
    """

    GAP = "GAP"
    INSUFFICIENT_HISTORY = "INSUFFICIENT_HISTORY"
    INSUFFICIENT_DATA = "INSUFFICIENT_DATA"
    DEGENERATE_WEEK = "DEGENERATE_WEEK"
    DEGENERATE_FIT = "DEGENERATE_FIT"
    DEGENERATE_METRIC = "DEGENERATE_METRIC"
    FIT_FAILURE = "FIT_FAILURE"
    NO_ADMISSIBLE_WINDOW = "NO_ADMISSIBLE_WINDOW"
    CLIPPED = "CLIPPED"
    BOUNDARY_VALUE = "BOUNDARY_VALUE"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class NoForecast:
    """
    Returned instead of a value when a forecaster's preconditions do not hold.

    Attributes
    ----------
    reason : ReasonCode
        Why no forecast was produced.
    detail : str
        Human readable context, e.g. which slot was missing.
    """

    reason: ReasonCode
    detail: str = ""

    def __str__(self) -> str:
        return f"no-forecast({self.reason.value}{': ' + self.detail if self.detail else ''})"
