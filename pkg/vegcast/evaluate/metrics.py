import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from vegcast.core import ForecastRecord, ReasonCode
from vegcast.utils import log_event

logger = logging.getLogger(__name__)

NAN = float("nan")


def arrays(records: list[ForecastRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Truth and predicted values as arrays."""
    truth = np.array([r.truth for r in records], dtype=float)
    predicted = np.array([r.predicted for r in records], dtype=float)
    return truth, predicted


def _degenerate(metric: str, detail: str) -> float:
    log_event(logger, "evaluate", None, ReasonCode.DEGENERATE_METRIC, metric=metric, detail=detail)
    return NAN


def _residual_ratio(truth: np.ndarray, predicted: np.ndarray, metric: str) -> float:
    if len(truth) < 2:
        return _degenerate(metric, f"{len(truth)} records")
    total = float(((truth - truth.mean()) ** 2).sum())
    if total == 0.0:
        return _degenerate(metric, "zero truth variance")
    return float(((truth - predicted) ** 2).sum()) / total


def r2_score(records: list[ForecastRecord]) -> float:
    """
    ``1 - sum((y - f)^2) / sum((y - mean(y))^2)`` over the records.

    Returns NaN (and logs ``DEGENERATE_METRIC``) for fewer than two records or
    zero truth variance.
    """
    ratio = _residual_ratio(*arrays(records), "r2_score")
    return NAN if math.isnan(ratio) else 1.0 - ratio


def s_metric(records: list[ForecastRecord]) -> float:
    """Percentage of truth standard deviation left in the errors, ``100 * sqrt(1 - R^2)``."""
    ratio = _residual_ratio(*arrays(records), "s_metric")
    return NAN if math.isnan(ratio) else 100.0 * math.sqrt(ratio)


def rmse(records: list[ForecastRecord]) -> float:
    if not records:
        return _degenerate("rmse", "no records")
    truth, predicted = arrays(records)
    return float(math.sqrt(np.mean((truth - predicted) ** 2)))


@dataclass(frozen=True)
class BiasFit:
    """
    Least-squares line of truth on forecast.

    A perfectly calibrated forecaster has slope 1 and intercept 0.
    """

    slope: float
    slope_stderr: float
    intercept: float
    intercept_stderr: float
    n: int
    degenerate: bool = False


def bias_regression(records: list[ForecastRecord]) -> BiasFit:
    """
    Ordinary least squares of the truth on the forecast, with standard errors.

    Fewer than three records or a constant forecast give a degenerate fit with NaN fields.
    """
    truth, predicted = arrays(records)
    if len(records) < 3 or np.ptp(predicted) == 0.0:
        _degenerate("bias_regression", "fewer than 3 records or zero forecast variance")
        return BiasFit(NAN, NAN, NAN, NAN, len(records), degenerate=True)
    fit = stats.linregress(predicted, truth)
    return BiasFit(float(fit.slope), float(fit.stderr), float(fit.intercept), float(fit.intercept_stderr),
                   len(records))


def match_records(records_method: list[ForecastRecord],
                  records_other: list[ForecastRecord]) -> tuple[list[tuple[ForecastRecord, ForecastRecord]], int]:
    """
    Pair records on ``(region, issue_date, lead)``.

    Returns
    -------
    tuple[list, int]
        Matched pairs in key order and the number of unmatched records dropped.
    """
    other = {r.key: r for r in records_other}
    mine = {r.key: r for r in records_method}
    keys = sorted(set(mine) & set(other))
    dropped = len(mine) + len(other) - 2 * len(keys)
    return [(mine[k], other[k]) for k in keys], dropped


def persistence_ratio(records_method: list[ForecastRecord], records_persistence: list[ForecastRecord]) -> float:
    """
    ``100 * RMSE(method) / RMSE(persistence)`` over the matched records.

    Unmatched records are dropped and counted in a log line; a zero persistence
    RMSE or an empty intersection gives NaN.
    """
    pairs, dropped = match_records(records_method, records_persistence)
    if dropped:
        logger.info("persistence ratio: dropped %d unmatched records", dropped)
    if not pairs:
        return _degenerate("persistence_ratio", "no matched records")
    reference = rmse([p for _, p in pairs])
    if reference == 0.0:
        return _degenerate("persistence_ratio", "zero persistence RMSE")
    return 100.0 * rmse([m for m, _ in pairs]) / reference


def skill_by_lead(records: list[ForecastRecord]) -> pd.DataFrame:
    """
    R²-score, S and RMSE per (region, lead).

    Returns
    -------
    pandas.DataFrame
        Columns ``region_id, lead, n, r2_score, s_metric, rmse`` sorted by region and lead.
    """
    groups: dict[tuple[str, int], list[ForecastRecord]] = {}
    for record in records:
        groups.setdefault((record.region_id, record.lead), []).append(record)
    rows = [{"region_id": region, "lead": lead, "n": len(group), "r2_score": r2_score(group),
             "s_metric": s_metric(group), "rmse": rmse(group)}
            for (region, lead), group in sorted(groups.items())]
    return pd.DataFrame(rows, columns=["region_id", "lead", "n", "r2_score", "s_metric", "rmse"])


def median_skill_by_lead(frame: pd.DataFrame) -> pd.DataFrame:
    """Median across regions of the per-region skill table, one row per lead."""
    if frame.empty:
        return pd.DataFrame(columns=["lead", "regions", "r2_score", "s_metric", "rmse"])
    grouped = frame.groupby("lead", sort=True)
    return pd.DataFrame({
        "lead": list(grouped.groups.keys()),
        "regions": grouped["region_id"].count().to_numpy(),
        "r2_score": grouped["r2_score"].median().to_numpy(),
        "s_metric": grouped["s_metric"].median().to_numpy(),
        "rmse": grouped["rmse"].median().to_numpy(),
    })
