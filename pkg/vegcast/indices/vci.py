import logging
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from vegcast.core import (DegenerateWeekError, IndexKind, IndexSeries, InvalidInputError, InvalidValueError,
                          ReasonCode, WeeklySeries)
from vegcast.utils import log_event

from .climatology import Climatology

logger = logging.getLogger(__name__)

VCI3M_WEEKS = 12
DEGENERATE_POLICIES = ("error", "midpoint")


@dataclass(frozen=True)
class VCIValues:
    """
    Raw VCI computation result.

    Attributes
    ----------
    values : np.ndarray
        VCI per slot, NaN gaps, clipped to [0, 100].
    clipped : int
        Values that fell outside [0, 100] before clipping.
    degenerate_weeks : tuple[int, ...]
        Weeks with max == min that held a present value.
    """

    values: np.ndarray
    clipped: int
    degenerate_weeks: tuple[int, ...] = ()


def vci_values(ndvi: np.ndarray, weeks: np.ndarray, clim: Climatology,
               degenerate_policy: str = "error") -> VCIValues:
    """
    ``100 * (NDVI - min_w) / (max_w - min_w)`` per slot, with ``w`` the slot's week of the year.

    Raises
    ------
    DegenerateWeekError
        With ``degenerate_policy="error"``, when a present value falls in a week with max == min.
    """
    if degenerate_policy not in DEGENERATE_POLICIES:
        raise InvalidValueError(f"degenerate_policy must be one of {DEGENERATE_POLICIES}, got {degenerate_policy!r}")
    ndvi = np.asarray(ndvi, dtype=float)
    low, high, _ = clim.lookup(weeks)
    spread = high - low
    present = ~np.isnan(ndvi)
    degenerate = present & (spread == 0)
    degenerate_weeks = tuple(sorted({int(w) for w in np.asarray(weeks)[degenerate]}))
    if degenerate_weeks and degenerate_policy == "error":
        raise DegenerateWeekError(degenerate_weeks)

    with np.errstate(divide="ignore", invalid="ignore"):
        values = 100.0 * (ndvi - low) / spread
    values[degenerate] = 50.0
    outside = present & ((values < 0.0) | (values > 100.0))
    values = np.where(present, np.clip(values, 0.0, 100.0), np.nan)
    return VCIValues(values, int(outside.sum()), degenerate_weeks)


def compute_vci(series: WeeklySeries, clim: Climatology, region_id: str = "",
                degenerate_policy: str = "error") -> IndexSeries:
    """
    Vegetation Condition Index of an NDVI series.

    Values outside the climatology range are clipped to [0, 100] and counted in a
    ``CLIPPED`` log event. Gaps propagate.

    Parameters
    ----------
    series : WeeklySeries
        NDVI.
    clim : Climatology
        Reference statistics.
    region_id : str, optional
        Identity of the result.
    degenerate_policy : str, optional
        ``"error"`` raises on a week with max == min, ``"midpoint"`` maps it to 50.

    Raises
    ------
    DegenerateWeekError
        See ``degenerate_policy``.
    """
    result = vci_values(series.values, series.grid.weeks_of_year(), clim, degenerate_policy)
    if result.clipped:
        log_event(logger, "indices", region_id, ReasonCode.CLIPPED, count=result.clipped)
    if result.degenerate_weeks:
        log_event(logger, "indices", region_id, ReasonCode.DEGENERATE_WEEK,
                  weeks=",".join(str(w) for w in result.degenerate_weeks))
    return IndexSeries(series.with_values(result.values), IndexKind.VCI, region_id)


def vci3m_values(vci: np.ndarray, ndvi_present: np.ndarray, weeks: int = VCI3M_WEEKS) -> np.ndarray:
    """
    Trailing mean of the present VCI values over ``weeks`` slots, gap where the
    current NDVI is absent or the window holds no VCI value.
    """
    vci = np.asarray(vci, dtype=float)
    padded = np.concatenate([np.full(weeks - 1, np.nan), vci])
    windows = sliding_window_view(padded, weeks)
    counts = (~np.isnan(windows)).sum(axis=1)
    sums = np.where(np.isnan(windows), 0.0, windows).sum(axis=1)
    values = np.full(len(vci), np.nan)
    ok = np.asarray(ndvi_present, dtype=bool) & (counts > 0)
    values[ok] = sums[ok] / counts[ok]
    return np.clip(values, 0.0, 100.0)


def compute_vci3m(vci: IndexSeries, ndvi: WeeklySeries) -> IndexSeries:
    """
    Three-month VCI: mean of the present VCI values of the 12 weeks up to each slot.

    A slot is a gap whenever the NDVI observation of that week is absent.

    Raises
    ------
    InvalidInputError
        If the series are shorter than 12 weeks, on different grids, or ``vci`` is not VCI.
    """
    if vci.kind is not IndexKind.VCI:
        raise InvalidInputError(f"VCI3M is computed from a VCI series, got {vci.kind}")
    if vci.grid != ndvi.grid:
        raise InvalidInputError("VCI and NDVI series are on different grids")
    if len(ndvi) < VCI3M_WEEKS:
        raise InvalidInputError(f"VCI3M needs a grid of at least {VCI3M_WEEKS} weeks, got {len(ndvi)}")
    return IndexSeries(vci.series.with_values(vci3m_values(vci.values, ndvi.present_mask)), IndexKind.VCI3M,
                       vci.region_id)


def compute_ndvi_anomaly(series: WeeklySeries, clim: Climatology, region_id: str = "") -> IndexSeries:
    """NDVI minus its climatological mean for the week of the year; gaps propagate."""
    _, _, mean = clim.lookup(series.grid.weeks_of_year())
    return IndexSeries(series.with_values(series.values - mean), IndexKind.NDVI_ANOMALY, region_id)
