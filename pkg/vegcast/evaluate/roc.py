import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from sklearn.metrics import auc

from vegcast.core import ForecastRecord, UndefinedMetricError, ALERT_THRESHOLD
from .metrics import arrays

logger = logging.getLogger(__name__)

ROC_COLUMNS = ["threshold", "hit_rate", "false_alarm_rate", "tp", "fp", "tn", "fn"]


@dataclass(frozen=True)
class ROCPoint:
    """
    One point of a ROC curve: the contingency table at binarization threshold ``b``.

    A forecast raises an alert when it is strictly below ``b``; a week is an
    actual drought when its truth is strictly below the drought threshold.
    """

    threshold: float
    hit_rate: float
    false_alarm_rate: float
    tp: int
    fp: int
    tn: int
    fn: int


def default_thresholds(drought_threshold: float = ALERT_THRESHOLD, count: int = 201) -> np.ndarray:
    """Evenly spaced binarization thresholds over [0, 100], plus the drought threshold itself."""
    grid = np.linspace(0.0, 100.0, count)
    return np.unique(np.append(grid, drought_threshold))


def contingency_table(alerts: np.ndarray, actual: np.ndarray) -> tuple[int, int, int, int]:
    """Counts ``(tp, fp, tn, fn)`` for boolean alert and actual arrays."""
    tp = int(np.count_nonzero(alerts & actual))
    fp = int(np.count_nonzero(alerts & ~actual))
    tn = int(np.count_nonzero(~alerts & ~actual))
    fn = int(np.count_nonzero(~alerts & actual))
    return tp, fp, tn, fn


def roc_curve(records: list[ForecastRecord], drought_threshold: float = ALERT_THRESHOLD,
              binarization_grid=None) -> list[ROCPoint]:
    """
    Hit rate and false alarm rate of the alert ``predicted < b`` for each threshold ``b``.

    Parameters
    ----------
    records : list[ForecastRecord]
        Forecasts with their truth.
    drought_threshold : float
        Truth strictly below this is an actual drought.
    binarization_grid : array-like, optional
        Binarization thresholds ``b``; defaults to :func:`default_thresholds`.

    Returns
    -------
    list[ROCPoint]
        One point per threshold in ascending threshold order; both rates are
        non-decreasing along the list.

    Raises
    ------
    UndefinedMetricError
        If the records hold no actual drought or no actual non-drought.
    """
    truth, predicted = arrays(records)
    actual = truth < drought_threshold
    if not actual.any():
        raise UndefinedMetricError(f"ROC undefined: no actual droughts below {drought_threshold}")
    if actual.all():
        raise UndefinedMetricError(f"ROC undefined: no actual non-droughts at or above {drought_threshold}")

    if binarization_grid is None:
        binarization_grid = default_thresholds(drought_threshold)
    positives = int(actual.sum())
    negatives = len(actual) - positives

    points = []
    for b in np.sort(np.asarray(binarization_grid, dtype=float)):
        tp, fp, tn, fn = contingency_table(predicted < b, actual)
        points.append(ROCPoint(float(b), tp / positives, fp / negatives, tp, fp, tn, fn))
    return points


def roc_auc(points: list[ROCPoint]) -> float:
    """
    Trapezoidal area under the curve, closed with the (0, 0) and (1, 1) corners.
    """
    far = np.array([0.0] + [p.false_alarm_rate for p in points] + [1.0])
    hit = np.array([0.0] + [p.hit_rate for p in points] + [1.0])
    order = np.lexsort((hit, far))
    return float(auc(far[order], hit[order]))


def roc_frame(points: list[ROCPoint]) -> pd.DataFrame:
    return pd.DataFrame([[getattr(p, c) for c in ROC_COLUMNS] for p in points], columns=ROC_COLUMNS)


@dataclass(frozen=True)
class TransitionPoint:
    """
    Skill at forecasting a move from non-drought into drought.

    ``hit_rate`` is the fraction of actual transitions that were forecast and
    ``false_alarm_ratio`` the fraction of forecast transitions that did not happen.
    Either is NaN when its denominator is empty.
    """

    threshold: float
    hit_rate: float
    false_alarm_ratio: float
    hits: int
    misses: int
    false_alarms: int
    correct_negatives: int

    @property
    def transitions(self) -> int:
        return self.hits + self.misses


def transition_skill(records: list[ForecastRecord], drought_threshold: float = ALERT_THRESHOLD,
                     binarization_grid=None) -> list[TransitionPoint]:
    """
    Skill at forecasting transitions into drought.

    Only records whose truth at the issue date is at or above ``drought_threshold``
    take part; an actual transition is truth below the threshold at the target,
    a predicted transition is a forecast below ``b``. Records without
    ``truth_at_issue`` are skipped.

    Parameters
    ----------
    records : list[ForecastRecord]
        Forecasts carrying ``truth_at_issue``.
    drought_threshold : float
        Drought threshold on the truth.
    binarization_grid : array-like, optional
        Forecast thresholds ``b``; defaults to the drought threshold alone.
    """
    eligible = [r for r in records if r.truth_at_issue is not None]
    if len(eligible) < len(records):
        logger.info("transition skill: %d records without truth at issue skipped", len(records) - len(eligible))
    subset = [r for r in eligible if r.truth_at_issue >= drought_threshold]
    truth, predicted = arrays(subset)
    actual = truth < drought_threshold
    if not actual.any():
        logger.info("transition skill at %s: no transitions in %d records", drought_threshold, len(subset))

    if binarization_grid is None:
        binarization_grid = [drought_threshold]
    points = []
    for b in np.sort(np.asarray(binarization_grid, dtype=float)):
        hits, false_alarms, correct_negatives, misses = contingency_table(predicted < b, actual)
        observed = hits + misses
        forecast = hits + false_alarms
        points.append(TransitionPoint(
            float(b),
            hits / observed if observed else math.nan,
            false_alarms / forecast if forecast else math.nan,
            hits, misses, false_alarms, correct_negatives))
    return points


def transition_frame(points: list[TransitionPoint]) -> pd.DataFrame:
    columns = ["threshold", "hit_rate", "false_alarm_ratio", "hits", "misses", "false_alarms", "correct_negatives"]
    return pd.DataFrame([[getattr(p, c) for c in columns] for p in points], columns=columns)
