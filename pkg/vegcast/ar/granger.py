import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from vegcast.core import IndexSeries, InvalidInputError, ReasonCode
from vegcast.utils import log_event

from .forecast import forecastable
from .model import ARConfig, solve_least_squares

logger = logging.getLogger(__name__)

DEFAULT_SOURCE_LAGS = 3
DEFAULT_THRESHOLD_PCT = 5.0
DEFAULT_MIN_COVERAGE_PCT = 50.0


@dataclass(frozen=True)
class GrangerFit:
    """
    Reduced and extended model fit quality on one window.

    Attributes
    ----------
    extended_rmse, reduced_rmse : float
        In-window residual RMSEs.
    pct_reduction : float
        ``100 * (1 - extended / reduced)``, 0 for a degenerate design.
    rows : int
        Regression rows both models were fit on.
    degenerate : bool
        True when the reduced model has nothing to explain.
    """

    extended_rmse: float
    reduced_rmse: float
    pct_reduction: float
    rows: int
    degenerate: bool = False


def _lags(values: np.ndarray, lags: int, start: int, stop: int) -> np.ndarray:
    # rows t in [start, stop): values t, t-1, ..., t-lags+1
    return sliding_window_view(values, lags)[start - lags + 1:stop - lags + 1, ::-1]


def granger_fit(target_window, source_window, p: int = 3, q: int = DEFAULT_SOURCE_LAGS, n: int = 4,
                demean: bool = True) -> GrangerFit:
    """
    Compare the AR model of a target with the model extended by source lags.

    The reduced model regresses ``X_{t+n}`` on ``p`` target lags, the extended
    one adds ``q`` lags of the source. Both are fit on the same complete rows.

    Parameters
    ----------
    target_window, source_window : array-like
        Aligned windows of equal length.
    p, q : int, optional
        Target and source lag counts.
    n : int, optional
        Lead in weeks.
    demean : bool, optional
        Remove each window's mean first.

    Returns
    -------
    GrangerFit
    """
    target = np.asarray(target_window, dtype=float)
    source = np.asarray(source_window, dtype=float)
    if target.shape != source.shape:
        raise InvalidInputError(f"granger windows differ in length: {len(target)} and {len(source)}")
    if demean:
        target = target - np.nanmean(target)
        source = source - np.nanmean(source)

    first = max(p, q) - 1
    stop = len(target) - n
    if stop <= first:
        return GrangerFit(0.0, 0.0, 0.0, 0, degenerate=True)
    reduced_design = _lags(target, p, first, stop)
    extended_design = np.hstack([reduced_design, _lags(source, q, first, stop)])
    targets = target[first + n:stop + n]
    complete = ~np.isnan(extended_design).any(axis=1) & ~np.isnan(targets)
    reduced_design, extended_design, targets = reduced_design[complete], extended_design[complete], targets[complete]

    reduced_coefficients, degenerate = solve_least_squares(reduced_design, targets)
    extended_coefficients, _ = solve_least_squares(extended_design, targets)
    rows = len(targets)
    if rows == 0:
        return GrangerFit(0.0, 0.0, 0.0, 0, degenerate=True)
    reduced_rmse = math.sqrt(float(np.mean((targets - reduced_design @ reduced_coefficients) ** 2)))
    extended_rmse = math.sqrt(float(np.mean((targets - extended_design @ extended_coefficients) ** 2)))
    # the reduced fit with zero source coefficients is itself an extended fit
    extended_rmse = min(extended_rmse, reduced_rmse)
    if degenerate or reduced_rmse == 0.0:
        return GrangerFit(extended_rmse, reduced_rmse, 0.0, rows, degenerate=True)
    return GrangerFit(extended_rmse, reduced_rmse, 100.0 * (1.0 - extended_rmse / reduced_rmse), rows)


@dataclass(frozen=True)
class GrangerEntry:
    """
    Influence of ``source`` on ``target``.

    Attributes
    ----------
    source, target : str
        Region ids (source j drives target i).
    pct_reduction : float
        Mean percentage RMSE reduction over the admissible windows (NaN without any).
    windows : int
        Admissible windows averaged.
    absent : bool
        True when the entry is not reported (below threshold, no window, or an
        ineligible region).
    reason : ReasonCode | None
        Why an absent entry has no value; None when it is merely below threshold.
    """

    source: str
    target: str
    pct_reduction: float
    windows: int
    absent: bool = False
    reason: ReasonCode | None = None


@dataclass
class GrangerMatrix:
    """
    Pairwise Granger results for a set of regions.

    Attributes
    ----------
    regions : list[str]
        All regions considered, sorted.
    entries : dict[tuple[str, str], GrangerEntry]
        Keyed by ``(source, target)``; distinct pairs only.
    coverage : dict[str, float]
        Percentage of forecastable weeks per region.
    threshold_pct : float
        Reporting threshold.
    """

    regions: list[str]
    entries: dict[tuple[str, str], GrangerEntry] = field(default_factory=dict)
    coverage: dict[str, float] = field(default_factory=dict)
    threshold_pct: float = DEFAULT_THRESHOLD_PCT

    def present(self) -> list[GrangerEntry]:
        return [e for _, e in sorted(self.entries.items()) if not e.absent]

    def pairs(self) -> set[tuple[str, str]]:
        return {(e.source, e.target) for e in self.present()}

    def to_frame(self) -> pd.DataFrame:
        rows = [{"source": e.source, "target": e.target, "pct_reduction": e.pct_reduction, "windows": e.windows,
                 "reported": not e.absent, "reason": "" if e.reason is None else e.reason.value}
                for _, e in sorted(self.entries.items())]
        return pd.DataFrame(rows, columns=["source", "target", "pct_reduction", "windows", "reported", "reason"])


def region_coverage(values: np.ndarray, cfg: ARConfig) -> float:
    """Percentage of slots (after the first training segment) where an AR forecast can be made."""
    issues = range(cfg.train_length - 1, len(values))
    if len(issues) == 0:
        return 0.0
    ok = sum(forecastable(values, i, cfg) is None for i in issues)
    return 100.0 * ok / len(issues)


def granger_matrix(regional_series: list[IndexSeries], cfg: ARConfig, threshold_pct: float = DEFAULT_THRESHOLD_PCT,
                   q: int = DEFAULT_SOURCE_LAGS, min_coverage_pct: float = DEFAULT_MIN_COVERAGE_PCT,
                   window_stride: int = 1) -> GrangerMatrix:
    """
    Mean Granger RMSE reduction for every ordered pair of distinct regions.

    Windows of ``cfg.train_length`` weeks are slid over the shared grid; a window
    is admissible for a pair when both regions are gap-free on it. Regions whose
    forecastable-week percentage does not exceed ``min_coverage_pct`` are left out.

    Parameters
    ----------
    regional_series : list[IndexSeries]
        At least two regional series on one grid.
    cfg : ARConfig
        ``order`` (p), ``train_length`` (T), ``lead`` (n) and ``demean``.
    threshold_pct : float, optional
        Entries below this mean reduction are reported absent.
    q : int, optional
        Source lags.
    min_coverage_pct : float, optional
        Eligibility threshold.
    window_stride : int, optional
        Slide step of the windows in weeks.

    Returns
    -------
    GrangerMatrix
    """
    if len(regional_series) < 2:
        raise InvalidInputError(f"granger analysis needs at least 2 regions, got {len(regional_series)}")
    grids = {s.grid for s in regional_series}
    if len(grids) != 1:
        raise InvalidInputError("granger analysis needs all regions on one grid")

    by_region = {s.region_id: s.values for s in regional_series}
    regions = sorted(by_region)
    matrix = GrangerMatrix(regions, threshold_pct=threshold_pct)
    matrix.coverage = {r: region_coverage(by_region[r], cfg) for r in regions}
    eligible = {r for r in regions if matrix.coverage[r] > min_coverage_pct}

    length = len(next(iter(by_region.values())))
    starts = range(0, length - cfg.train_length + 1, window_stride)
    gap_free = {r: np.array([not np.isnan(by_region[r][s:s + cfg.train_length]).any() for s in starts], dtype=bool)
                for r in regions}

    for target in regions:
        for source in regions:
            if source == target:
                continue
            key = (source, target)
            if target not in eligible or source not in eligible:
                matrix.entries[key] = GrangerEntry(source, target, float("nan"), 0, absent=True,
                                                   reason=ReasonCode.INSUFFICIENT_DATA)
                continue
            admissible = [s for s, ok in zip(starts, gap_free[target] & gap_free[source]) if ok]
            if not admissible:
                log_event(logger, "granger", target, ReasonCode.NO_ADMISSIBLE_WINDOW, source=source)
                matrix.entries[key] = GrangerEntry(source, target, float("nan"), 0, absent=True,
                                                   reason=ReasonCode.NO_ADMISSIBLE_WINDOW)
                continue
            reductions = [granger_fit(by_region[target][s:s + cfg.train_length],
                                      by_region[source][s:s + cfg.train_length],
                                      cfg.order, q, cfg.lead, cfg.demean).pct_reduction for s in admissible]
            mean = float(np.mean(reductions))
            matrix.entries[key] = GrangerEntry(source, target, mean, len(admissible), absent=mean < threshold_pct)

    logger.info("granger: %d of %d pairs at or above %.1f%%", len(matrix.present()),
                len(matrix.entries), threshold_pct)
    return matrix
