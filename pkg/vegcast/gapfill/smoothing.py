import logging

import numpy as np
from scipy.signal import savgol_coeffs, savgol_filter

from vegcast.core import WeeklySeries
from vegcast.utils import log_event

from .config import FillWarning, GapFillConfig
from .interpolators import BaseInterpolator, NoSupportError

logger = logging.getLogger(__name__)


def fill_gaps(series: WeeklySeries, cfg: GapFillConfig, warnings: list | None = None) -> WeeklySeries:
    """
    Fill internal gap runs of at most ``cfg.l_max`` weeks.

    Leading and trailing gaps, and runs longer than ``l_max``, stay gaps. Present
    values are never modified.

    Parameters
    ----------
    series : WeeklySeries
        The series to fill.
    cfg : GapFillConfig
        Interpolator and ``l_max``.
    warnings : list, optional
        Receives a :class:`FillWarning` for every eligible run that could not be filled.

    Returns
    -------
    WeeklySeries
        The filled series on the same grid.
    """
    values = series.values.copy()
    runs = [(a, b) for a, b in series.gap_runs()
            if a > 0 and b < len(series) and b - a <= cfg.l_max]
    if not runs:
        return series

    interpolator = BaseInterpolator.get_interpolator(cfg.interpolator)
    state = interpolator.prepare(series.values, cfg)
    for start, stop in runs:
        try:
            filled = interpolator.fill_run(series.values, start, stop, cfg, state)
        except NoSupportError as e:
            log_event(logger, "gapfill", None, None, level=logging.DEBUG,
                      start=series.grid.slot_date(start).isoformat(), length=stop - start, detail=str(e))
            if warnings is not None:
                warnings.append(FillWarning(series.grid.slot_date(start), stop - start, str(e)))
            continue
        values[start:stop] = filled
    return series.with_values(values)


def _smooth_run(run: np.ndarray, window: int, order: int) -> np.ndarray:
    half = window // 2
    smoothed = savgol_filter(run, window, order, mode="interp")
    n = len(run)
    # within half a window of an edge, fit the truncated window
    for k in range(min(half, n)):
        for position, segment in ((k, run[:k + half + 1]), (n - 1 - k, run[n - 1 - k - half:])):
            length = len(segment)
            pos = k if position == k else length - 1 - k
            coefficients = savgol_coeffs(length, min(order, length - 1), pos=pos, use="dot")
            smoothed[position] = coefficients @ segment
    return smoothed


def savitzky_golay(series: WeeklySeries, cfg: GapFillConfig) -> WeeklySeries:
    """
    Savitzky-Golay smoothing inside each run of present values.

    Runs shorter than ``cfg.savgol_window`` pass through unchanged. Windows never
    span a gap; points near a run edge use a polynomial fit to the truncated window.
    """
    values = series.values.copy()
    for start, stop in series.present_runs():
        if stop - start < cfg.savgol_window:
            continue
        values[start:stop] = _smooth_run(series.values[start:stop], cfg.savgol_window, cfg.savgol_order)
    return series.with_values(values)


def preprocess(series: WeeklySeries, cfg: GapFillConfig, warnings: list | None = None) -> WeeklySeries:
    """Gap-filling followed by smoothing, the interpolation path of the preprocessing."""
    return savitzky_golay(fill_gaps(series, cfg, warnings), cfg)
