import logging
from dataclasses import replace

import numpy as np
import pandas as pd

from vegcast.ar import ARConfig, ar_forecast
from vegcast.core import ForecastRecord, InsufficientClimatologyError, Method, NoForecast
from vegcast.evaluate import forecastable_issues, r2_score
from vegcast.gapfill import ForecastModeBuilder, GapFillConfig
from vegcast.indices import build_climatology, vci3m_values, vci_values
from vegcast.ingest import RegionSampleSet, aggregate_region

logger = logging.getLogger(__name__)

DEFAULT_CANDIDATES = (4, 6, 8)


def _vci3m(ndvi: np.ndarray, weeks: np.ndarray, clim) -> np.ndarray:
    vci = vci_values(ndvi, weeks, clim, "midpoint").values
    return vci3m_values(vci, ~np.isnan(vci))


def _region_scores(sample_set: RegionSampleSet, gapfill: GapFillConfig, ar_cfg: ARConfig,
                   first_issue: int | None, stride: int) -> tuple[float, float] | None:
    raw = aggregate_region(sample_set)
    builder = ForecastModeBuilder(raw, gapfill)
    weeks = raw.grid.weeks_of_year()
    try:
        clim = build_climatology(builder.full)
    except InsufficientClimatologyError as e:
        logger.info("l_max %d: region %s skipped, %s", gapfill.l_max, sample_set.region_id, e)
        return None
    truth = _vci3m(builder.full.values, weeks, clim)

    assessed, ok = forecastable_issues(truth, ar_cfg, first_issue)
    start = ar_cfg.train_length - 1 if first_issue is None else first_issue
    records = []
    for i in range(start, len(truth) - ar_cfg.lead, stride):
        if np.isnan(truth[i + ar_cfg.lead]):
            continue
        view = builder.at(i)
        predicted = ar_forecast(view.with_values(_vci3m(view.values, weeks[:i + 1], clim)), view.grid.slot_date(i),
                                ar_cfg)
        if isinstance(predicted, NoForecast):
            continue
        records.append(ForecastRecord(sample_set.region_id, view.grid.slot_date(i), ar_cfg.lead, predicted,
                                      float(truth[i + ar_cfg.lead]), Method.AR))
    pct = 100.0 * ok / assessed if assessed else 0.0
    return r2_score(records), pct


def lmax_tradeoff(pixel_sets: dict[str, RegionSampleSet], candidates=DEFAULT_CANDIDATES, lead: int = 4,
                  ar_cfg: ARConfig | None = None, gapfill: GapFillConfig | None = None,
                  first_issue: int | None = None, stride: int = 1) -> pd.DataFrame:
    """
    Skill against coverage for several maximum fillable gap lengths.

    Longer fills make more weeks forecastable but put interpolated values into
    the training data. For each candidate ``l_max`` the regional series are
    preprocessed again, VCI3M is computed, and the AR forecaster is run in
    forecast mode at lead ``lead``.

    Parameters
    ----------
    pixel_sets : dict[str, RegionSampleSet]
        Composited pixels per region.
    candidates : iterable of int
        ``l_max`` values to compare.
    lead : int
        Forecast lead in weeks.
    ar_cfg : ARConfig, optional
        Forecaster settings; the lead is replaced by ``lead``.
    gapfill : GapFillConfig, optional
        Preprocessing settings; ``l_max`` is replaced by each candidate.
    first_issue, stride : int, optional
        Assessed issue slots.

    Returns
    -------
    pandas.DataFrame
        Columns ``l_max, regions, median_r2_score, median_pct_weeks_forecastable``.
    """
    ar_cfg = replace(ar_cfg or ARConfig(), lead=lead)
    gapfill = gapfill or GapFillConfig()
    rows = []
    for l_max in candidates:
        scores = [_region_scores(pixel_sets[r], gapfill.with_l_max(int(l_max)), ar_cfg, first_issue, stride)
                  for r in sorted(pixel_sets)]
        scores = [s for s in scores if s is not None]
        r2 = [s[0] for s in scores if not np.isnan(s[0])]
        rows.append({
            "l_max": int(l_max),
            "regions": len(scores),
            "median_r2_score": float(np.median(r2)) if r2 else float("nan"),
            "median_pct_weeks_forecastable": float(np.median([s[1] for s in scores])) if scores else float("nan"),
        })
        logger.info("l_max %d: %s", l_max, rows[-1])
    return pd.DataFrame(rows, columns=["l_max", "regions", "median_r2_score", "median_pct_weeks_forecastable"])
