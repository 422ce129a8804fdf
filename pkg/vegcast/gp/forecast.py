import logging
from datetime import date

import numpy as np

from vegcast.core import (GPFitError, IndexKind, IndexSeries, InvalidInputError, NoForecast, NumericalError,
                          ReasonCode)
from vegcast.utils import log_event

from .model import MIN_TRAINING_POINTS, GPModel, gp_fit, predict_arrays

logger = logging.getLogger(__name__)

MIN_HISTORY = 52
FORECASTABLE_KINDS = (IndexKind.NDVI_ANOMALY, IndexKind.VCI3M)


def fit_issue_model(index_series: IndexSeries, issue_index: int, kernel_structure: str = "RBF",
                    restarts: int = 5, seed: int = 0, min_history: int = MIN_HISTORY, train_length: int = 0,
                    warm_start: GPModel | None = None) -> GPModel | NoForecast:
    """
    Fit the forecasting GP on the present values up to slot ``issue_index``.

    Parameters
    ----------
    train_length : int, optional
        Only the most recent ``train_length`` slots are used; 0 uses all history.
    warm_start : GPModel, optional
        A previous fit of the same structure whose hyperparameters seed the optimiser.
    """
    if index_series.kind not in FORECASTABLE_KINDS:
        raise InvalidInputError(f"GP forecasts are defined for NDVI_ANOMALY and VCI3M, not {index_series.kind}")

    first = 0 if train_length <= 0 else max(0, issue_index - train_length + 1)
    window = index_series.values[first:issue_index + 1]
    present = ~np.isnan(window)
    available = int((~np.isnan(index_series.values[:issue_index + 1])).sum())
    if available < min_history:
        return NoForecast(ReasonCode.INSUFFICIENT_HISTORY,
                          f"{available} present values up to the issue date, {min_history} required")

    if present.sum() < MIN_TRAINING_POINTS:
        return NoForecast(ReasonCode.INSUFFICIENT_HISTORY,
                          f"{int(present.sum())} present values in the training window")
    times = (np.flatnonzero(present) + first).astype(float)
    values = window[present]
    try:
        return gp_fit(times, values, kernel_structure, restarts=restarts, seed=seed,
                      warm_start=None if warm_start is None else warm_start.theta)
    except GPFitError as e:
        log_event(logger, "gp_forecast", index_series.region_id, ReasonCode.FIT_FAILURE,
                  issue=index_series.grid.slot_date(issue_index).isoformat())
        return e.best_model if e.best_model is not None else NoForecast(ReasonCode.FIT_FAILURE, str(e))
    except NumericalError as e:
        return NoForecast(ReasonCode.FIT_FAILURE, str(e))


def gp_forecast(index_series: IndexSeries, issue_date: date, lead_weeks: int, kernel_structure: str = "RBF",
                restarts: int = 5, seed: int = 0, min_history: int = MIN_HISTORY,
                train_length: int = 0) -> tuple[float, float] | NoForecast:
    """
    Extrapolate an index series ``lead_weeks`` beyond ``issue_date`` with a GP.

    The GP (constant mean = training mean) is refit on the data up to the issue
    date on every call.

    Parameters
    ----------
    index_series : IndexSeries
        NDVI_ANOMALY or VCI3M series; ``issue_date`` must be one of its slot dates.
    issue_date : date
        Last date the forecaster may see.
    lead_weeks : int
        Weeks ahead, 0 predicts at the issue date itself.

    Returns
    -------
    tuple[float, float] | NoForecast
        Posterior mean and predictive std, or ``NoForecast(INSUFFICIENT_HISTORY)``
        with fewer than ``min_history`` present values up to the issue date.
    """
    issue_index = index_series.grid.index_of(issue_date)
    model = fit_issue_model(index_series, issue_index, kernel_structure, restarts, seed, min_history, train_length)
    if isinstance(model, NoForecast):
        return model
    mean, std = predict_arrays(model, [issue_index + lead_weeks])
    return float(mean[0]), float(std[0])
