from dataclasses import dataclass

import numpy as np
import pandas as pd

from vegcast.core import InsufficientClimatologyError, ParseError, WeeklySeries
from vegcast.utils import save_frame

WEEKS = 52
MIN_VALUES_PER_WEEK = 2


@dataclass(frozen=True, eq=False)
class Climatology:
    """
    Per week-of-year statistics of a reference NDVI series.

    Week 53 is folded into week 52, so the arrays are indexed by ``week - 1``
    for weeks 1..52.

    Attributes
    ----------
    ndvi_min, ndvi_max, ndvi_mean : np.ndarray
        Length-52 arrays.
    counts : np.ndarray
        Number of values behind each week's statistics.
    """

    ndvi_min: np.ndarray
    ndvi_max: np.ndarray
    ndvi_mean: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        for name in ("ndvi_min", "ndvi_max", "ndvi_mean", "counts"):
            array = np.array(getattr(self, name), dtype=float if name != "counts" else int)
            if array.shape != (WEEKS,):
                raise ParseError(f"climatology {name} must have {WEEKS} weeks, got {array.shape}", 1)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    def __eq__(self, other):
        if not isinstance(other, Climatology):
            return NotImplemented
        return all(np.array_equal(getattr(self, n), getattr(other, n))
                   for n in ("ndvi_min", "ndvi_max", "ndvi_mean", "counts"))

    def lookup(self, weeks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(min, max, mean)`` for an array of weeks of the year."""
        index = np.asarray(weeks, dtype=int) - 1
        return self.ndvi_min[index], self.ndvi_max[index], self.ndvi_mean[index]

    def degenerate_weeks(self) -> list[int]:
        return [int(w) + 1 for w in np.flatnonzero(self.ndvi_max == self.ndvi_min)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"week": np.arange(1, WEEKS + 1), "min": self.ndvi_min, "max": self.ndvi_max,
                             "mean": self.ndvi_mean})


def build_climatology(series: WeeklySeries, min_values: int = MIN_VALUES_PER_WEEK) -> Climatology:
    """
    Min, max and mean of the present values sharing each week of the year.

    Raises
    ------
    InsufficientClimatologyError
        Naming the first week with fewer than ``min_values`` present values.
    """
    frame = pd.DataFrame({"week": series.grid.weeks_of_year(), "value": series.values}).dropna()
    stats = frame.groupby("week")["value"].agg(["min", "max", "sum", "count"]).reindex(range(1, WEEKS + 1))
    counts = stats["count"].fillna(0).astype(int).to_numpy()
    short = np.flatnonzero(counts < min_values)
    if short.size:
        raise InsufficientClimatologyError(int(short[0]) + 1, int(counts[short[0]]))

    ndvi_min = stats["min"].to_numpy(dtype=float)
    ndvi_max = stats["max"].to_numpy(dtype=float)
    # rounding of the sum may step outside [min, max] on constant weeks
    ndvi_mean = np.clip(stats["sum"].to_numpy(dtype=float) / counts, ndvi_min, ndvi_max)
    return Climatology(ndvi_min, ndvi_max, ndvi_mean, counts)


def write_climatology(clim: Climatology, filename: str):
    """Write ``week,min,max,mean`` CSV."""
    save_frame(clim.to_frame(), filename)


def read_climatology(filename: str) -> Climatology:
    frame = pd.read_csv(filename, float_precision="round_trip")
    if list(frame.columns) != ["week", "min", "max", "mean"]:
        raise ParseError(f"{filename}: expected header week,min,max,mean", 1)
    frame = frame.sort_values("week")
    if frame["week"].tolist() != list(range(1, WEEKS + 1)):
        raise ParseError(f"{filename}: weeks must be 1..{WEEKS}", 2)
    # counts are not persisted
    return Climatology(frame["min"].to_numpy(), frame["max"].to_numpy(), frame["mean"].to_numpy(),
                       np.full(WEEKS, MIN_VALUES_PER_WEEK))
