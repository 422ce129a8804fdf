import math
from enum import Enum

from .errors import InvalidValueError

# VCI3M category boundaries; a value equal to a boundary belongs to the drier class
WET_ABOVE = 50.0
NORMAL_ABOVE = 35.0
MODERATE_ABOVE = 20.0
SEVERE_ABOVE = 10.0

BOUNDARIES = (WET_ABOVE, NORMAL_ABOVE, MODERATE_ABOVE, SEVERE_ABOVE)

# the operational alert fires on VCI3M strictly below this value
ALERT_THRESHOLD = NORMAL_ABOVE


class DroughtCategory(Enum):
    """
    Vegetation condition categories on the VCI3M scale, wettest first.
    """

    WET = "WET"
    NORMAL = "NORMAL"
    MODERATE = "MODERATE"
    SEVERE = "SEVERE"
    EXTREME = "EXTREME"

    def __str__(self):
        return self.value

    @property
    def is_drought(self) -> bool:
        return self in (DroughtCategory.MODERATE, DroughtCategory.SEVERE, DroughtCategory.EXTREME)


def categorize(vci3m: float) -> DroughtCategory:
    """
    Map a VCI3M value to its drought category.

    WET above 50, NORMAL in (35, 50], MODERATE in (20, 35], SEVERE in (10, 20]
    and EXTREME at or below 10.

    Raises
    ------
    InvalidValueError
        If ``vci3m`` is not finite.
    """
    try:
        value = float(vci3m)
    except (TypeError, ValueError):
        raise InvalidValueError(f"VCI3M must be a real number, got {vci3m!r}") from None
    if not math.isfinite(value):
        raise InvalidValueError(f"VCI3M must be finite, got {vci3m!r}")

    if value > WET_ABOVE:
        return DroughtCategory.WET
    if value > NORMAL_ABOVE:
        return DroughtCategory.NORMAL
    if value > MODERATE_ABOVE:
        return DroughtCategory.MODERATE
    if value > SEVERE_ABOVE:
        return DroughtCategory.SEVERE
    return DroughtCategory.EXTREME


def is_boundary_value(vci3m: float) -> bool:
    """True when ``vci3m`` sits exactly on a category boundary."""
    return float(vci3m) in BOUNDARIES
