from dataclasses import dataclass, replace
from datetime import date
from enum import Enum

from vegcast.core import InvalidValueError


class Interpolator(Enum):
    QUADRATIC = "QUADRATIC"
    LINEAR = "LINEAR"
    CUBIC = "CUBIC"
    LAST_VALUE = "LAST_VALUE"
    MEAN_VALUE = "MEAN_VALUE"
    GP = "GP"

    def __str__(self):
        return self.value

    @staticmethod
    def from_string(value: str) -> "Interpolator":
        try:
            return Interpolator[value.strip().upper().replace("-", "_")]
        except KeyError:
            available = ", ".join(i.value for i in Interpolator)
            raise InvalidValueError(f"unknown interpolator {value!r}. Available interpolators: {available}") from None

    @property
    def is_local(self) -> bool:
        """Whether a filled value only depends on observations near its gap."""
        return self not in (Interpolator.MEAN_VALUE, Interpolator.GP)


@dataclass(frozen=True)
class GapFillConfig:
    """
    Settings of the interpolation path of the preprocessing.

    Attributes
    ----------
    l_max : int
        Longest gap run (weeks) that is filled; longer runs stay gaps.
    interpolator : Interpolator
        Method used on the eligible gap runs.
    savgol_window : int
        Savitzky-Golay window length in weeks, odd.
    savgol_order : int
        Savitzky-Golay polynomial order, below ``savgol_window``.
    gp_kernel : str
        Kernel structure of the GP interpolator.
    gp_restarts : int
        Random optimiser restarts of the GP interpolator.
    seed : int
        Seed for the GP interpolator's restarts.
    """

    l_max: int = 6
    interpolator: Interpolator = Interpolator.QUADRATIC
    savgol_window: int = 7
    savgol_order: int = 2
    gp_kernel: str = "RBF+PERIODIC"
    gp_restarts: int = 2
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.interpolator, str):
            object.__setattr__(self, "interpolator", Interpolator.from_string(self.interpolator))
        if self.l_max < 1:
            raise InvalidValueError(f"l_max must be >= 1, got {self.l_max}")
        if self.savgol_window % 2 != 1 or self.savgol_window < 1:
            raise InvalidValueError(f"savgol_window must be a positive odd number, got {self.savgol_window}")
        if not 0 <= self.savgol_order < self.savgol_window:
            raise InvalidValueError(
                f"savgol_order must be in [0, savgol_window), got {self.savgol_order} for window {self.savgol_window}")

    def with_interpolator(self, interpolator: Interpolator) -> "GapFillConfig":
        return replace(self, interpolator=interpolator)

    def with_l_max(self, l_max: int) -> "GapFillConfig":
        return replace(self, l_max=l_max)

    @property
    def dependency_horizon(self) -> int:
        """
        Slots behind the end of a series whose preprocessed values can change when
        the series is extended; earlier values are final.
        """
        return self.savgol_window + 2 * self.l_max + 4


@dataclass(frozen=True)
class FillWarning:
    """
    A gap run that was eligible for filling but had too little support.

    Attributes
    ----------
    start_date : date
        Date of the first missing slot.
    length : int
        Run length in weeks.
    reason : str
        What was missing.
    """

    start_date: date
    length: int
    reason: str
