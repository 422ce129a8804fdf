import logging
from dataclasses import dataclass
from datetime import date
from enum import Enum

import numpy as np

from vegcast.core import (GPFitError, NoForecast, NumericalError, ObservationSeries, ReasonCode, TimeGrid,
                          WeeklySeries)
from vegcast.utils import log_event

from .model import MIN_TRAINING_POINTS, GPModel, condition, gp_fit, predict_arrays

logger = logging.getLogger(__name__)


class GapFillModeKind(Enum):
    FORECAST = "FORECAST"
    NON_FORECAST = "NON_FORECAST"


@dataclass(frozen=True)
class GapFillMode:
    """
    Which observations a GP gap-fill may train on.

    ``NON_FORECAST`` uses the whole stream and serves as ground truth;
    ``FORECAST`` only uses observations dated on or before ``cutoff``.
    """

    kind: GapFillModeKind
    cutoff: date | None = None

    def __post_init__(self):
        if (self.kind is GapFillModeKind.FORECAST) != (self.cutoff is not None):
            raise ValueError("FORECAST mode needs a cutoff date, NON_FORECAST mode takes none")

    @classmethod
    def forecast(cls, cutoff: date) -> "GapFillMode":
        return cls(GapFillModeKind.FORECAST, cutoff)

    @classmethod
    def non_forecast(cls) -> "GapFillMode":
        return cls(GapFillModeKind.NON_FORECAST)

    def training_samples(self, obs: ObservationSeries):
        samples = obs.good_samples()
        if self.kind is GapFillModeKind.FORECAST:
            samples = [s for s in samples if s.date <= self.cutoff]
        return samples


def gp_gapfill(obs: ObservationSeries, grid: TimeGrid, mode: GapFillMode, kernel_structure: str = "RBF+PERIODIC",
               restarts: int = 5, seed: int = 0, fixed: GPModel | None = None,
               mean: float | None = None) -> WeeklySeries | NoForecast:
    """
    Posterior-mean series of a pixel on the full grid.

    Hyperparameters are fitted on the training samples of ``mode`` (so forecast
    mode never sees data after its cutoff); values after the cutoff are
    extrapolations.

    Parameters
    ----------
    obs : ObservationSeries
        The raw pixel stream; sample dates are used at daily resolution.
    grid : TimeGrid
        Output grid.
    mode : GapFillMode
        Training set selection.
    kernel_structure : str, optional
        Kernel of the fit.
    restarts, seed : int, optional
        Passed to :func:`gp_fit`.
    fixed : GPModel, optional
        Reuse this model's kernel and noise instead of fitting.
    mean : float, optional
        Constant mean with ``fixed``; defaults to the training mean.

    Returns
    -------
    WeeklySeries | NoForecast
        The gap-free series, or ``NoForecast(INSUFFICIENT_DATA)`` with fewer than 10
        training samples, or ``NoForecast(FIT_FAILURE)``.
    """
    samples = mode.training_samples(obs)
    if len(samples) < MIN_TRAINING_POINTS:
        log_event(logger, "gp_gapfill", obs.region_id, ReasonCode.INSUFFICIENT_DATA,
                  pixel=obs.pixel_id, samples=len(samples), mode=mode.kind.value)
        return NoForecast(ReasonCode.INSUFFICIENT_DATA,
                          f"pixel {obs.pixel_id}: {len(samples)} training samples, {MIN_TRAINING_POINTS} required")

    times = np.array([grid.weeks_since_start(s.date) for s in samples])
    values = np.array([s.value for s in samples])
    try:
        if fixed is not None:
            model = condition(fixed.kernel, fixed.noise_std, times, values, fixed.structure, mean)
        else:
            model = gp_fit(times, values, kernel_structure, restarts=restarts, seed=seed)
    except GPFitError as e:
        if e.best_model is None:
            log_event(logger, "gp_gapfill", obs.region_id, ReasonCode.FIT_FAILURE, pixel=obs.pixel_id)
            return NoForecast(ReasonCode.FIT_FAILURE, str(e))
        log_event(logger, "gp_gapfill", obs.region_id, ReasonCode.FIT_FAILURE, pixel=obs.pixel_id,
                  detail="using best restart")
        model = e.best_model
    except NumericalError as e:
        log_event(logger, "gp_gapfill", obs.region_id, ReasonCode.FIT_FAILURE, pixel=obs.pixel_id)
        return NoForecast(ReasonCode.FIT_FAILURE, str(e))

    mean_values, _ = predict_arrays(model, grid.times())
    return WeeklySeries(grid, mean_values)
