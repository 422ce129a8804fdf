import logging
from abc import ABC, abstractmethod

import numpy as np

from vegcast.core import NoForecast, ObservationSeries
from vegcast.gapfill import ForecastModeBuilder, GapFillConfig
from vegcast.gp import GapFillMode, gp_gapfill
from vegcast.ingest import RegionSampleSet, aggregate_region
from vegcast.utils import sub_seed

logger = logging.getLogger(__name__)


def register_preprocessor(style: str):
    """
    Decorator to register a preprocessor class for a pipeline style.
    """
    def decorator(cls):
        BasePreprocessor.register_preprocessor(style, cls)
        return cls
    return decorator


class BasePreprocessor(ABC):
    """
    Turns the raw observations of one region into gap-filled NDVI "units".

    A unit is a pixel, or the whole region when preprocessing runs on the
    regional aggregate. Units are later averaged into the regional series
    requiring ``unit_min_count`` present units per week.

    Parameters
    ----------
    sample_set : RegionSampleSet
        Composited pixel series of the region.
    observations : list[ObservationSeries]
        Raw pixel streams in the order of ``sample_set.pixel_series``.
    gapfill : GapFillConfig
        Preprocessing configuration.
    pixel_units : bool
        Preprocess each pixel (True) or the regional aggregate (False).
    seed : int
        Run seed.
    """

    _preprocessors: dict[str, type] = {}

    def __init__(self, sample_set: RegionSampleSet, observations: list[ObservationSeries], gapfill: GapFillConfig,
                 pixel_units: bool = True, seed: int = 0):
        self.sample_set = sample_set
        self.observations = observations
        self.gapfill = gapfill
        self.pixel_units = pixel_units
        self.seed = seed
        self.grid = sample_set.grid

    @staticmethod
    def register_preprocessor(style: str, cls: type):
        BasePreprocessor._preprocessors[style] = cls

    @staticmethod
    def get_preprocessor(style: str) -> type:
        """
        Raises
        ------
        ValueError
            If no preprocessor is registered for the style.
        """
        if style not in BasePreprocessor._preprocessors:
            available = ", ".join(BasePreprocessor._preprocessors)
            raise ValueError(f"Preprocessor {style} not found. Available preprocessors: {available}")
        return BasePreprocessor._preprocessors[style]

    @property
    def region_id(self) -> str:
        return self.sample_set.region_id

    @property
    @abstractmethod
    def unit_count(self) -> int:
        pass

    @property
    @abstractmethod
    def unit_min_count(self) -> int:
        pass

    @abstractmethod
    def full(self) -> np.ndarray:
        """
        Non-forecast preprocessing of every unit over the whole grid.

        Returns
        -------
        np.ndarray
            ``(units, slots)`` NDVI with NaN gaps.
        """
        pass

    @abstractmethod
    def tail(self, unit: int, issue_index: int) -> tuple[int, np.ndarray]:
        """
        Forecast-mode values of one unit at an issue slot.

        Returns
        -------
        tuple[int, np.ndarray]
            First slot that may differ from :meth:`full` and the values from
            there up to ``issue_index`` inclusive.
        """
        pass


@register_preprocessor("MODIS_INTERP")
class InterpolationPreprocessor(BasePreprocessor):
    """Bounded interpolation of short gaps followed by Savitzky-Golay smoothing."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if self.pixel_units:
            series = self.sample_set.pixel_series
        else:
            series = (aggregate_region(self.sample_set),)
        self.builders = [ForecastModeBuilder(s, self.gapfill) for s in series]

    @property
    def unit_count(self) -> int:
        return len(self.builders)

    @property
    def unit_min_count(self) -> int:
        return self.sample_set.min_pixels_for_aggregate if self.pixel_units else 1

    def full(self) -> np.ndarray:
        return np.vstack([b.full.values for b in self.builders])

    def tail(self, unit: int, issue_index: int) -> tuple[int, np.ndarray]:
        return self.builders[unit].tail(issue_index)


@register_preprocessor("LANDSAT_GP")
class GPPreprocessor(BasePreprocessor):
    """
    GP regression of every pixel's raw stream at daily resolution.

    Forecast-mode series are refit on the observations up to each issue date, so
    a tail always starts at slot 0.
    """

    @property
    def unit_count(self) -> int:
        return len(self.observations)

    @property
    def unit_min_count(self) -> int:
        return self.sample_set.min_pixels_for_aggregate

    def _fill(self, unit: int, mode: GapFillMode, grid, *names) -> np.ndarray:
        obs = self.observations[unit]
        result = gp_gapfill(obs, grid, mode, self.gapfill.gp_kernel, restarts=self.gapfill.gp_restarts,
                            seed=sub_seed(self.seed, "gp_gapfill", obs.pixel_id, *names))
        if isinstance(result, NoForecast):
            return np.full(grid.length, np.nan)
        return result.values

    def full(self) -> np.ndarray:
        rows = [self._fill(u, GapFillMode.non_forecast(), self.grid) for u in range(self.unit_count)]
        return np.vstack(rows) if rows else np.empty((0, self.grid.length))

    def tail(self, unit: int, issue_index: int) -> tuple[int, np.ndarray]:
        mode = GapFillMode.forecast(self.grid.slot_date(issue_index))
        return 0, self._fill(unit, mode, self.grid.sub_grid(0, issue_index + 1), issue_index)
