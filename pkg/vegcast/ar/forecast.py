import logging
from datetime import date

import numpy as np

from vegcast.core import IndexSeries, NoForecast, ReasonCode, WeeklySeries

from .model import ARConfig, ARModel, ar_fit, lag_design

logger = logging.getLogger(__name__)


def _series_of(series: IndexSeries | WeeklySeries) -> WeeklySeries:
    return series.series if isinstance(series, IndexSeries) else series


def forecastable(values: np.ndarray, issue_index: int, cfg: ARConfig) -> NoForecast | None:
    """
    Check the AR preconditions at an issue slot.

    The ``p`` most recent values must be present, the training segment must lie
    inside the series, and the segment must be gap-free (``strict_window``) or
    hold at least ``cfg.min_rows`` complete regression rows.

    Returns
    -------
    NoForecast | None
        None when a forecast can be made, else the reason it cannot.
    """
    first = issue_index - cfg.train_length + 1
    if first < 0 or issue_index >= len(values):
        return NoForecast(ReasonCode.INSUFFICIENT_HISTORY,
                          f"training segment of {cfg.train_length} weeks does not fit before slot {issue_index}")
    window = values[first:issue_index + 1]
    recent = window[-cfg.order:]
    if np.isnan(recent).any():
        return NoForecast(ReasonCode.GAP, f"one of the {cfg.order} most recent values is missing")
    if cfg.strict_window:
        if np.isnan(window).any():
            return NoForecast(ReasonCode.GAP, "gap inside the training segment")
        return None
    rows = len(lag_design(window, cfg.order, cfg.lead)[1])
    if rows < cfg.min_rows:
        return NoForecast(ReasonCode.GAP, f"{rows} complete regression rows, {cfg.min_rows} required")
    return None


def fit_at(values: np.ndarray, issue_index: int, cfg: ARConfig) -> ARModel | NoForecast:
    """Fit the model on the training segment ending at ``issue_index``."""
    blocked = forecastable(values, issue_index, cfg)
    if blocked is not None:
        return blocked
    window = values[issue_index - cfg.train_length + 1:issue_index + 1]
    mean = None
    if cfg.demean_source == "history":
        history = values[:issue_index + 1]
        mean = float(np.nanmean(history))
    return ar_fit(window, cfg, mean)


def ar_forecast(series: IndexSeries | WeeklySeries, issue_date: date, cfg: ARConfig) -> float | NoForecast:
    """
    Direct ``cfg.lead``-week AR forecast from the data up to ``issue_date``.

    Parameters
    ----------
    series : IndexSeries | WeeklySeries
        The series; ``issue_date`` must be one of its slot dates.
    issue_date : date
        Last date the forecaster may see.
    cfg : ARConfig
        Order, training length, lead and gap policy.

    Returns
    -------
    float | NoForecast
        The forecast for ``issue_date + lead`` weeks, or the reason (GAP,
        INSUFFICIENT_HISTORY) no forecast was made.
    """
    weekly = _series_of(series)
    issue_index = weekly.grid.index_of(issue_date)
    model = fit_at(weekly.values, issue_index, cfg)
    if isinstance(model, NoForecast):
        return model
    return model.predict(weekly.values[issue_index - cfg.order + 1:issue_index + 1])


def persistence_forecast(series: IndexSeries | WeeklySeries, issue_date: date, n: int = 0) -> float | NoForecast:
    """
    The issue-date value, used as the forecast for any lead ``n``.

    Returns
    -------
    float | NoForecast
        The value, or ``NoForecast(GAP)`` when the issue slot is a gap.
    """
    weekly = _series_of(series)
    value = weekly.value_at(weekly.grid.index_of(issue_date))
    if value is None:
        return NoForecast(ReasonCode.GAP, f"no value at the issue date {issue_date}")
    return value
