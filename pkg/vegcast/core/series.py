from dataclasses import dataclass, field
from datetime import date
from enum import Enum

import numpy as np

from .errors import InvalidInputError, InvalidValueError
from .time_grid import TimeGrid

INDEX_TOLERANCE = 1e-9


class Quality(Enum):
    GOOD = "good"
    BAD = "bad"

    @staticmethod
    def from_string(value: str) -> "Quality":
        lower_value = value.strip().lower()
        if lower_value == "good":
            return Quality.GOOD
        if lower_value == "bad":
            return Quality.BAD
        raise InvalidValueError(f"unknown quality token {value!r}, expected 'good' or 'bad'")


@dataclass(frozen=True)
class Sample:
    """
    One raw NDVI observation.

    Attributes
    ----------
    date : date
        Acquisition date.
    value : float
        Dimensionless NDVI.
    quality : Quality
        Cloud/quality flag after upstream masking.
    """

    date: date
    value: float
    quality: Quality = Quality.GOOD

    @property
    def is_good(self) -> bool:
        return self.quality is Quality.GOOD


@dataclass(frozen=True)
class ObservationSeries:
    """
    Irregular raw observation stream of a single pixel.

    Attributes
    ----------
    pixel_id : str
        Opaque pixel identifier.
    region_id : str
        Opaque region identifier the pixel belongs to.
    samples : tuple[Sample, ...]
        Samples in strictly increasing date order.
    """

    pixel_id: str
    region_id: str
    samples: tuple[Sample, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        for previous, current in zip(self.samples, self.samples[1:]):
            if current.date <= previous.date:
                raise InvalidInputError(
                    f"pixel {self.pixel_id}: samples not strictly increasing at {current.date}")
        for sample in self.samples:
            if sample.is_good and not (np.isfinite(sample.value) and -1.0 <= sample.value <= 1.0):
                raise InvalidValueError(
                    f"pixel {self.pixel_id}: good NDVI {sample.value} on {sample.date} outside [-1, 1]")

    def good_samples(self) -> list[Sample]:
        return [s for s in self.samples if s.is_good]

    def truncated(self, cutoff: date) -> "ObservationSeries":
        """Copy holding only samples dated on or before ``cutoff``."""
        return ObservationSeries(self.pixel_id, self.region_id,
                                 tuple(s for s in self.samples if s.date <= cutoff))

    @property
    def first_date(self) -> date | None:
        return self.samples[0].date if self.samples else None

    @property
    def last_date(self) -> date | None:
        return self.samples[-1].date if self.samples else None

    def __len__(self):
        return len(self.samples)


class WeeklySeries:
    """
    A series on a weekly grid; gaps are stored as NaN.

    Instances are immutable: the value array is copied on construction and
    marked read-only. A series whose every slot is a gap is the empty series.

    Parameters
    ----------
    grid : TimeGrid
        The grid the values live on.
    values : array-like
        One value per slot, NaN (or None) marks a gap.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: TimeGrid, values):
        array = np.array([np.nan if v is None else v for v in values], dtype=float) \
            if not isinstance(values, np.ndarray) else np.array(values, dtype=float, copy=True)
        if array.ndim != 1 or array.shape[0] != grid.length:
            raise InvalidInputError(
                f"series has {array.shape[0] if array.ndim == 1 else array.shape} values "
                f"for a grid of length {grid.length}")
        if np.isinf(array).any():
            raise InvalidValueError("series values must be finite or NaN (gap)")
        array.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", array)

    def __setattr__(self, key, value):
        raise AttributeError("WeeklySeries is immutable")

    @classmethod
    def empty(cls, grid: TimeGrid) -> "WeeklySeries":
        return cls(grid, np.full(grid.length, np.nan))

    def __len__(self) -> int:
        return self.grid.length

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeeklySeries):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values, equal_nan=True)

    def __repr__(self) -> str:
        return (f"WeeklySeries(start={self.grid.start_date}, length={len(self)}, "
                f"present={self.present_count})")

    @property
    def present_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def present_count(self) -> int:
        return int(self.present_mask.sum())

    @property
    def is_empty(self) -> bool:
        return self.present_count == 0

    def is_present(self, index: int) -> bool:
        return 0 <= index < len(self) and not np.isnan(self.values[index])

    def value_at(self, index: int) -> float | None:
        if not self.is_present(index):
            return None
        return float(self.values[index])

    def present_values(self) -> np.ndarray:
        return self.values[self.present_mask]

    def with_values(self, values) -> "WeeklySeries":
        return WeeklySeries(self.grid, values)

    def slice(self, start: int, stop: int) -> "WeeklySeries":
        """Sub-series on slots ``start .. stop - 1`` (clamped to the grid)."""
        sub = self.grid.sub_grid(start, stop)
        start = max(0, start)
        return WeeklySeries(sub, self.values[start:start + sub.length])

    def truncated_at(self, index: int) -> "WeeklySeries":
        """Sub-series holding slots ``0 .. index``."""
        return self.slice(0, index + 1)

    def gap_runs(self) -> list[tuple[int, int]]:
        """
        Maximal runs of consecutive gaps.

        Returns
        -------
        list[tuple[int, int]]
            ``(start, stop)`` pairs, ``stop`` exclusive.
        """
        return _runs(~self.present_mask)

    def present_runs(self) -> list[tuple[int, int]]:
        """Maximal runs of consecutive present slots, ``(start, stop)`` with ``stop`` exclusive."""
        return _runs(self.present_mask)


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    if mask.size == 0:
        return []
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return [(int(a), int(b)) for a, b in zip(edges[::2], edges[1::2])]


class IndexKind(Enum):
    NDVI = "NDVI"
    NDVI_ANOMALY = "NDVI_ANOMALY"
    VCI = "VCI"
    VCI3M = "VCI3M"

    def __str__(self):
        return self.value

    @staticmethod
    def from_string(value: str) -> "IndexKind":
        try:
            return IndexKind[value.strip().upper().replace("-", "_")]
        except KeyError:
            raise InvalidValueError(f"unknown index kind {value!r}") from None


@dataclass(frozen=True, eq=False)
class IndexSeries:
    """
    A weekly series tagged with the index it holds and the region it describes.

    Attributes
    ----------
    series : WeeklySeries
        The values.
    kind : IndexKind
        Which index the values are.
    region_id : str
        Region the series was aggregated over (or pixel id for pixel-level series).
    """

    series: WeeklySeries
    kind: IndexKind
    region_id: str = ""

    def __post_init__(self):
        present = self.series.present_values()
        if present.size == 0:
            return
        if self.kind in (IndexKind.VCI, IndexKind.VCI3M):
            low, high = 0.0, 100.0
        elif self.kind is IndexKind.NDVI:
            low, high = -1.0, 1.0
        else:
            return
        if present.min() < low - INDEX_TOLERANCE or present.max() > high + INDEX_TOLERANCE:
            raise InvalidValueError(
                f"{self.kind} series for region {self.region_id!r} has values outside [{low}, {high}]")

    @property
    def grid(self) -> TimeGrid:
        return self.series.grid

    @property
    def values(self) -> np.ndarray:
        return self.series.values

    def __eq__(self, other):
        if not isinstance(other, IndexSeries):
            return NotImplemented
        return self.kind is other.kind and self.region_id == other.region_id and self.series == other.series

    def truncated_at(self, index: int) -> "IndexSeries":
        return IndexSeries(self.series.truncated_at(index), self.kind, self.region_id)

    def with_series(self, series: WeeklySeries) -> "IndexSeries":
        return IndexSeries(series, self.kind, self.region_id)
