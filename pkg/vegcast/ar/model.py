import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg

from vegcast.core import InvalidValueError

logger = logging.getLogger(__name__)

RIDGE_CONDITION = 1e12
RIDGE_FACTOR = 1e-8
MIN_MARGIN = 10
DEMEAN_SOURCES = ("window", "history")


@dataclass(frozen=True)
class ARConfig:
    """
    Direct n-step autoregressive forecaster settings.

    Attributes
    ----------
    order : int
        Number of lags p.
    train_length : int
        Length T of the training segment in weeks.
    lead : int
        Lead time n in weeks.
    demean : bool
        Subtract the mean before fitting and add it back to the forecast.
    strict_window : bool
        Require the whole training segment to be gap-free.
    demean_source : str
        ``"window"`` (training segment mean) or ``"history"`` (mean of all data up to the issue date).
    min_valid_fraction : float
        With ``strict_window`` off, at least this fraction of ``T - p - n`` regression
        rows must be complete.
    """

    order: int = 3
    train_length: int = 200
    lead: int = 1
    demean: bool = True
    strict_window: bool = False
    demean_source: str = "window"
    min_valid_fraction: float = 0.8

    def __post_init__(self):
        if self.order < 1:
            raise InvalidValueError(f"AR order must be >= 1, got {self.order}")
        if self.lead < 1:
            raise InvalidValueError(f"lead must be >= 1, got {self.lead}")
        if self.train_length < self.order + self.lead + MIN_MARGIN:
            raise InvalidValueError(
                f"train_length must be >= order + lead + {MIN_MARGIN} = {self.order + self.lead + MIN_MARGIN}, "
                f"got {self.train_length}")
        if self.demean_source not in DEMEAN_SOURCES:
            raise InvalidValueError(f"demean_source must be one of {DEMEAN_SOURCES}, got {self.demean_source!r}")

    @property
    def min_rows(self) -> int:
        return math.ceil(self.min_valid_fraction * (self.train_length - self.order - self.lead))


@dataclass(frozen=True)
class ARModel:
    """
    A fitted direct n-step AR model.

    Attributes
    ----------
    coefficients : tuple[float, ...]
        ``a_0 .. a_{p-1}``; ``a_i`` multiplies the value ``i`` weeks before the issue date.
    training_mean : float
        Mean removed before fitting, 0 without demeaning.
    residual_std : float
        Standard deviation of the in-sample residuals.
    lead : int
        Weeks ahead the model predicts.
    rows : int
        Regression rows the fit used.
    degenerate : bool
        True when the design had no variance; the model then predicts the training mean.
    """

    coefficients: tuple[float, ...]
    training_mean: float
    residual_std: float
    lead: int
    rows: int = 0
    degenerate: bool = False

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def predict(self, recent) -> float:
        """
        Forecast from the most recent values.

        Parameters
        ----------
        recent : array-like
            The last ``order`` values in date order (the issue-date value last).
        """
        recent = np.asarray(recent, dtype=float)[::-1][:self.order]
        return float(self.training_mean + np.dot(self.coefficients, recent - self.training_mean))


def lag_design(values: np.ndarray, order: int, lead: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Regression rows of ``X_{t+n}`` on ``(X_t, ..., X_{t-p+1})``.

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        Design matrix (rows, p), most recent lag first, and targets. Rows holding a
        gap are dropped.
    """
    values = np.asarray(values, dtype=float)
    if len(values) < order + lead:
        return np.empty((0, order)), np.empty(0)
    lags = sliding_window_view(values[:len(values) - lead], order)[:, ::-1]
    targets = values[order - 1 + lead:]
    complete = ~np.isnan(lags).any(axis=1) & ~np.isnan(targets)
    return lags[complete], targets[complete]


def solve_least_squares(design: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, bool]:
    """
    Normal-equation solution with a ridge fallback.

    A ridge of ``1e-8 * trace`` is added when the Gram condition number exceeds
    ``1e12``; a zero-trace design gives zero coefficients.

    Returns
    -------
    tuple[np.ndarray, bool]
        Coefficients and whether the design was degenerate.
    """
    gram = design.T @ design
    trace = float(np.trace(gram))
    if design.shape[0] == 0 or trace <= np.finfo(float).tiny:
        return np.zeros(design.shape[1]), True
    if np.linalg.cond(gram) > RIDGE_CONDITION:
        gram = gram + RIDGE_FACTOR * trace * np.eye(gram.shape[0])
    return linalg.solve(gram, design.T @ targets, assume_a="pos"), False


def ar_fit(window, cfg: ARConfig, mean: float | None = None) -> ARModel:
    """
    Fit the direct n-step AR model on a training segment.

    Parameters
    ----------
    window : array-like
        Training segment in date order; gaps (NaN) remove the rows that touch them.
    cfg : ARConfig
        Order, lead and demeaning.
    mean : float, optional
        Mean to remove instead of the segment mean (only used with ``cfg.demean``).

    Returns
    -------
    ARModel
        The fitted model. A design without variance (e.g. a constant segment)
        gives a degenerate model with zero coefficients that forecasts the mean.
    """
    window = np.asarray(window, dtype=float)
    present = window[~np.isnan(window)]
    training_mean = 0.0
    if cfg.demean and present.size:
        training_mean = float(present.mean()) if mean is None else float(mean)

    design, targets = lag_design(window - training_mean, cfg.order, cfg.lead)
    coefficients, degenerate = solve_least_squares(design, targets)
    residuals = targets - design @ coefficients
    dof = max(1, len(targets) - cfg.order)
    residual_std = float(math.sqrt(residuals @ residuals / dof)) if len(targets) else 0.0
    if degenerate:
        logger.debug("degenerate AR design over %d rows", len(targets))
    return ARModel(tuple(float(c) for c in coefficients), training_mean, residual_std, cfg.lead,
                   rows=len(targets), degenerate=degenerate)
