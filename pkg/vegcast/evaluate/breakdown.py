import logging
import math
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd
from scipy import stats

from vegcast.ar import ARConfig, forecastable
from vegcast.core import (DroughtCategory, ForecastRecord, IndexSeries, WeeklySeries, categorize, DataError,
                          InvalidValueError)
from .metrics import rmse

logger = logging.getLogger(__name__)

BREAKDOWNS = ("category", "week_of_year", "region")
UNGROUPED = "UNGROUPED"


def _bucket_key(record: ForecastRecord, by: str, groups: dict[str, str] | None):
    if by == "category":
        return categorize(record.truth)
    if by == "week_of_year":
        return record.target_week
    if groups is not None:
        return groups.get(record.region_id, UNGROUPED)
    return record.region_id


def _bucket_order(key):
    if isinstance(key, DroughtCategory):
        return list(DroughtCategory).index(key)
    return key


def breakdown_rmse(records: list[ForecastRecord], by: str, groups: dict[str, str] | None = None) -> pd.DataFrame:
    """
    RMSE per bucket.

    Parameters
    ----------
    records : list[ForecastRecord]
        Non-empty record set.
    by : str
        ``category`` (drought category of the truth), ``week_of_year`` (calendar
        week of the target date) or ``region``.
    groups : dict[str, str], optional
        Region to group label; only used with ``by="region"``. Regions missing
        from the mapping land in ``UNGROUPED``.

    Returns
    -------
    pandas.DataFrame
        Columns ``<by>, n, rmse``; buckets without records are absent.
    """
    if by not in BREAKDOWNS:
        raise InvalidValueError(f"unknown breakdown {by!r}, expected one of {BREAKDOWNS}")
    if not records:
        raise DataError("breakdown of an empty record set")
    buckets: dict = {}
    for record in records:
        buckets.setdefault(_bucket_key(record, by, groups), []).append(record)
    column = "group" if by == "region" and groups is not None else by
    rows = [{column: str(key) if isinstance(key, DroughtCategory) else key, "n": len(bucket), "rmse": rmse(bucket)}
            for key, bucket in sorted(buckets.items(), key=lambda kv: _bucket_order(kv[0]))]
    return pd.DataFrame(rows, columns=[column, "n", "rmse"])


def read_region_groups(filename: str) -> dict[str, str]:
    """Read a ``region_id,group`` CSV into a mapping."""
    frame = pd.read_csv(filename, dtype=str)
    missing = {"region_id", "group"} - set(frame.columns)
    if missing:
        raise DataError(f"{filename}: missing columns {sorted(missing)}")
    return dict(zip(frame["region_id"].str.strip(), frame["group"].str.strip()))


def _values_of(series) -> np.ndarray:
    if isinstance(series, (IndexSeries, WeeklySeries)):
        return series.values
    return np.asarray(series, dtype=float)


def forecastable_issues(values: np.ndarray, cfg: ARConfig, first_issue: int | None = None) -> tuple[int, int]:
    """
    Count assessment weeks and those where an AR forecast can be made.

    Assessment weeks are the issue slots from ``first_issue`` (default: the end
    of the first training segment) whose target still lies on the grid.
    """
    start = cfg.train_length - 1 if first_issue is None else first_issue
    issues = range(max(start, 0), len(values) - cfg.lead)
    ok = sum(forecastable(values, i, cfg) is None for i in issues)
    return len(issues), ok


def coverage_report(series_set, cfg: ARConfig, lead: int | None = None,
                    first_issue: int | None = None) -> pd.DataFrame:
    """
    Percentage of assessment weeks where the AR preconditions hold, per region.

    Parameters
    ----------
    series_set : dict[str, IndexSeries | WeeklySeries] | list[IndexSeries]
        Regional series; a list is keyed by each series' ``region_id``.
    cfg : ARConfig
        Gap policy, order and training length.
    lead : int, optional
        Overrides ``cfg.lead``.
    first_issue : int, optional
        First assessed issue slot.

    Returns
    -------
    pandas.DataFrame
        Columns ``region_id, assessed_weeks, forecastable_weeks, pct_weeks_forecastable``
        sorted by region.
    """
    if lead is not None:
        cfg = replace(cfg, lead=lead)
    if not isinstance(series_set, dict):
        series_set = {s.region_id: s for s in series_set}
    rows = []
    for region_id in sorted(series_set):
        assessed, ok = forecastable_issues(_values_of(series_set[region_id]), cfg, first_issue)
        pct = 100.0 * ok / assessed if assessed else 0.0
        rows.append({"region_id": region_id, "assessed_weeks": assessed, "forecastable_weeks": ok,
                     "pct_weeks_forecastable": pct})
    return pd.DataFrame(rows, columns=["region_id", "assessed_weeks", "forecastable_weeks", "pct_weeks_forecastable"])


@dataclass(frozen=True)
class ClearPixelResult:
    """
    RMSE against the percentage of clear pixels in the issue week.

    Attributes
    ----------
    pearson_r : float
        Correlation between bucket percentage and bucket RMSE; NaN when undefined.
    table : pandas.DataFrame
        Columns ``clear_pct, n, rmse``.
    skipped : int
        Records without clear fraction metadata.
    """

    pearson_r: float
    table: pd.DataFrame
    skipped: int = 0

    @property
    def undefined(self) -> bool:
        return math.isnan(self.pearson_r)


def clear_pixel_correlation(records: list[ForecastRecord],
                            clear_fraction_per_issue: dict[tuple[str, object], float] | None = None
                            ) -> ClearPixelResult:
    """
    Bucket records by integer clear-pixel percentage and correlate bucket RMSE with it.

    Parameters
    ----------
    records : list[ForecastRecord]
        The forecasts.
    clear_fraction_per_issue : dict, optional
        ``(region_id, issue_date) -> fraction in [0, 1]``; falls back to each
        record's ``clear_fraction``.

    Returns
    -------
    ClearPixelResult
        With NaN correlation when fewer than three buckets exist. Constant RMSE
        across buckets gives a correlation of 0.
    """
    buckets: dict[int, list[ForecastRecord]] = {}
    skipped = 0
    for record in records:
        fraction = record.clear_fraction
        if clear_fraction_per_issue is not None:
            fraction = clear_fraction_per_issue.get((record.region_id, record.issue_date), fraction)
        if fraction is None or not math.isfinite(fraction):
            skipped += 1
            continue
        buckets.setdefault(int(round(100.0 * fraction)), []).append(record)
    if skipped:
        logger.info("clear pixel correlation: %d records without clear fraction", skipped)

    table = pd.DataFrame([{"clear_pct": pct, "n": len(b), "rmse": rmse(b)} for pct, b in sorted(buckets.items())],
                         columns=["clear_pct", "n", "rmse"])
    if len(table) < 3:
        logger.info("clear pixel correlation undefined: %d buckets", len(table))
        return ClearPixelResult(math.nan, table, skipped)
    errors = table["rmse"].to_numpy(dtype=float)
    if np.ptp(errors) == 0.0:
        return ClearPixelResult(0.0, table, skipped)
    r, _ = stats.pearsonr(table["clear_pct"].to_numpy(dtype=float), errors)
    return ClearPixelResult(float(r), table, skipped)
