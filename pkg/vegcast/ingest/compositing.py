import logging
from dataclasses import dataclass, field

import numpy as np

from vegcast.core import (SATURDAY, InvalidInputError, ObservationSeries, TimeGrid, WeeklySeries,
                          align_to_grid)

logger = logging.getLogger(__name__)

DEFAULT_MIN_PIXELS = 25


def composite_weekly(obs: ObservationSeries, grid: TimeGrid) -> WeeklySeries:
    """
    Weekly mean composite of a pixel's good observations.

    Parameters
    ----------
    obs : ObservationSeries
        The raw stream.
    grid : TimeGrid
        Target grid covering every sample date.

    Returns
    -------
    WeeklySeries
        Each slot holds the mean of the good samples in its window, slots without
        samples are gaps.
    """
    aligned = align_to_grid(obs, grid)
    sums = np.zeros(grid.length)
    counts = np.zeros(grid.length, dtype=int)
    for index, value in aligned:
        sums[index] += value
        counts[index] += 1

    values = np.full(grid.length, np.nan)
    present = counts > 0
    values[present] = sums[present] / counts[present]
    return WeeklySeries(grid, values)


@dataclass(frozen=True)
class RegionSampleSet:
    """
    The composited pixel series of one region.

    Attributes
    ----------
    region_id : str
        The region.
    pixel_series : tuple[WeeklySeries, ...]
        One composited series per sampled pixel, all on the same grid.
    min_pixels_for_aggregate : int
        Fewer present pixel values than this leaves a gap in the regional series.
    pixel_ids : tuple[str, ...]
        Pixel identifiers in the order of ``pixel_series`` (optional).
    """

    region_id: str
    pixel_series: tuple[WeeklySeries, ...]
    min_pixels_for_aggregate: int = DEFAULT_MIN_PIXELS
    pixel_ids: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "pixel_series", tuple(self.pixel_series))
        object.__setattr__(self, "pixel_ids", tuple(self.pixel_ids))
        if self.min_pixels_for_aggregate < 1:
            raise InvalidInputError(
                f"min_pixels_for_aggregate must be >= 1, got {self.min_pixels_for_aggregate}")
        grids = {s.grid for s in self.pixel_series}
        if len(grids) > 1:
            raise InvalidInputError(f"region {self.region_id}: pixel series are on {len(grids)} different grids")
        if self.pixel_ids and len(self.pixel_ids) != len(self.pixel_series):
            raise InvalidInputError(f"region {self.region_id}: pixel_ids and pixel_series differ in length")

    @property
    def grid(self) -> TimeGrid:
        if not self.pixel_series:
            raise InvalidInputError(f"region {self.region_id} has no pixels")
        return self.pixel_series[0].grid

    @property
    def pixel_count(self) -> int:
        return len(self.pixel_series)

    def matrix(self) -> np.ndarray:
        """Pixel values as a ``(pixels, slots)`` array with NaN gaps."""
        if not self.pixel_series:
            raise InvalidInputError(f"region {self.region_id} has no pixels")
        return np.vstack([s.values for s in self.pixel_series])

    def present_counts(self) -> np.ndarray:
        return (~np.isnan(self.matrix())).sum(axis=0)

    def clear_fraction(self) -> np.ndarray:
        """Per slot, the fraction of pixels with a present value."""
        return self.present_counts() / self.pixel_count

    def with_pixel_series(self, pixel_series) -> "RegionSampleSet":
        return RegionSampleSet(self.region_id, tuple(pixel_series), self.min_pixels_for_aggregate,
                               self.pixel_ids)


def aggregate_region(sample_set: RegionSampleSet) -> WeeklySeries:
    """
    Regional mean of the pixel series.

    A slot is the mean of the pixels present there; it is a gap when fewer than
    ``min_pixels_for_aggregate`` pixels are present.

    Raises
    ------
    InvalidInputError
        If the set holds no pixels.
    """
    return WeeklySeries(sample_set.grid, aggregate_values(sample_set.matrix(), sample_set.min_pixels_for_aggregate))


def aggregate_values(matrix: np.ndarray, min_pixels: int) -> np.ndarray:
    """
    Column means of a (pixels, weeks) matrix over its present entries, NaN where
    fewer than ``min_pixels`` entries are present.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    values = np.full(matrix.shape[1], np.nan)
    if matrix.shape[0] == 0:
        return values
    present = ~np.isnan(matrix)
    counts = present.sum(axis=0)
    sums = np.where(present, matrix, 0.0).sum(axis=0)

    enough = counts >= min_pixels
    values[enough] = sums[enough] / counts[enough]
    # rounding can step one ulp outside the contributing range
    lows = np.where(present, matrix, np.inf).min(axis=0)
    highs = np.where(present, matrix, -np.inf).max(axis=0)
    values[enough] = np.clip(values[enough], lows[enough], highs[enough])
    return values


def grid_for(observations: list[ObservationSeries], anchor_weekday: int = SATURDAY) -> TimeGrid:
    """
    The smallest weekly grid covering every sample of every observation series.

    Raises
    ------
    InvalidInputError
        If there are no samples at all.
    """
    firsts = [o.first_date for o in observations if len(o)]
    lasts = [o.last_date for o in observations if len(o)]
    if not firsts:
        raise InvalidInputError("no observations found")
    return TimeGrid.covering(min(firsts), max(lasts), anchor_weekday)


def build_region_sets(observations: list[ObservationSeries], grid: TimeGrid,
                      min_pixels_for_aggregate: int = DEFAULT_MIN_PIXELS) -> dict[str, RegionSampleSet]:
    """
    Composite every pixel onto ``grid`` and group the pixels by region.

    Returns
    -------
    dict[str, RegionSampleSet]
        Keyed by region id, in sorted order.
    """
    grouped: dict[str, list[ObservationSeries]] = {}
    for obs in observations:
        grouped.setdefault(obs.region_id, []).append(obs)

    region_sets = {}
    for region_id in sorted(grouped):
        pixels = sorted(grouped[region_id], key=lambda o: o.pixel_id)
        region_sets[region_id] = RegionSampleSet(
            region_id,
            tuple(composite_weekly(o, grid) for o in pixels),
            min_pixels_for_aggregate,
            tuple(o.pixel_id for o in pixels))
        logger.debug("region %s: %d pixels composited", region_id, len(pixels))
    return region_sets
