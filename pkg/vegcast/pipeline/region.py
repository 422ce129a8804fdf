import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from vegcast.ar import ar_forecast, persistence_forecast
from vegcast.config import PipelineConfig
from vegcast.core import (ForecastRecord, IndexKind, IndexSeries, InsufficientClimatologyError, Method, NoForecast,
                          ObservationSeries, ReasonCode, TimeGrid, WeeklySeries)
from vegcast.gp import GPModel, fit_issue_model, predict_arrays
from vegcast.storage import StageCache, content_key
from vegcast.indices import Climatology, build_climatology, vci3m_values, vci_values
from vegcast.ingest import RegionSampleSet, aggregate_values
from vegcast.utils import log_event, sub_seed

from .preprocessors import BasePreprocessor

logger = logging.getLogger(__name__)

TRUTH_KINDS = (IndexKind.NDVI, IndexKind.VCI, IndexKind.VCI3M, IndexKind.NDVI_ANOMALY)


@dataclass
class RegionTruth:
    """
    Non-forecast (full history) series of one region.

    Attributes
    ----------
    region_id : str
    indices : dict[IndexKind, IndexSeries]
        NDVI, VCI, VCI3M and (when the regional climatology exists) NDVI_ANOMALY.
    climatology : Climatology | None
        Regional NDVI climatology.
    pixel_count : int
        Pixels sampled in the region.
    excluded_units : int
        Units left out of the VCI average for lack of climatology.
    """

    region_id: str
    indices: dict[IndexKind, IndexSeries]
    climatology: Climatology | None = None
    pixel_count: int = 0
    excluded_units: int = 0

    def series_of(self, kind: IndexKind) -> WeeklySeries | None:
        index = self.indices.get(kind)
        return None if index is None else index.series


def region_indices(region_id: str, grid: TimeGrid, ndvi: np.ndarray, vci: np.ndarray,
                   climatology: Climatology | None) -> dict[IndexKind, IndexSeries]:
    """
    Index series of a region from its aggregate NDVI and VCI.

    VCI3M is a gap wherever the aggregate NDVI is, whether or not VCI is
    present there; NDVI_ANOMALY needs the regional climatology.
    """
    indices = {
        IndexKind.NDVI: IndexSeries(WeeklySeries(grid, ndvi), IndexKind.NDVI, region_id),
        IndexKind.VCI: IndexSeries(WeeklySeries(grid, vci), IndexKind.VCI, region_id),
        IndexKind.VCI3M: IndexSeries(WeeklySeries(grid, vci3m_values(vci, ~np.isnan(ndvi))), IndexKind.VCI3M,
                                     region_id),
    }
    if climatology is not None:
        _, _, mean = climatology.lookup(grid.weeks_of_year())
        indices[IndexKind.NDVI_ANOMALY] = IndexSeries(WeeklySeries(grid, ndvi - mean), IndexKind.NDVI_ANOMALY,
                                                      region_id)
    return indices


class RegionProcessor:
    """
    Preprocessing, indices and issue-date views of one region.

    The truth series are computed once from all observations. A view at issue
    slot ``i`` reruns the preprocessing on the data up to ``i`` only and
    recomputes the indices from it, reusing the fixed climatologies of the truth.

    Parameters
    ----------
    cfg : PipelineConfig
        Run configuration.
    sample_set : RegionSampleSet
        Composited pixels of the region.
    observations : list[ObservationSeries]
        Raw pixel streams in the same order.
    """

    def __init__(self, cfg: PipelineConfig, sample_set: RegionSampleSet, observations: list[ObservationSeries]):
        self.cfg = cfg
        self.region_id = sample_set.region_id
        self.sample_set = sample_set
        self.grid = sample_set.grid
        self.weeks = self.grid.weeks_of_year()
        self.pixel_mode = cfg.climatology_mode == "pixel"
        preprocessor = BasePreprocessor.get_preprocessor(cfg.style)
        self.preprocessor: BasePreprocessor = preprocessor(sample_set, observations, cfg.gapfill_config(),
                                                          pixel_units=self.pixel_mode, seed=cfg.seed)
        self._units = None
        self._unit_vci = None
        self._unit_climatologies: list[Climatology | None] = []
        self._truth: RegionTruth | None = None

    def truth(self) -> RegionTruth:
        """
        Raises
        ------
        InsufficientClimatologyError
            If no climatology (pixel or regional) can be built for VCI.
        DegenerateWeekError
            Under the ``error`` policy, on a week whose climatology has max == min.
        """
        if self._truth is not None:
            return self._truth

        self._units = self.preprocessor.full()
        ndvi = aggregate_values(self._units, self.preprocessor.unit_min_count)

        climatology = None
        failure = None
        try:
            climatology = build_climatology(WeeklySeries(self.grid, ndvi))
        except InsufficientClimatologyError as e:
            failure = e
            log_event(logger, "indices", self.region_id, ReasonCode.INSUFFICIENT_DATA, detail=str(e))

        excluded = 0
        if self.pixel_mode:
            self._unit_vci = np.full_like(self._units, np.nan)
            for u, values in enumerate(self._units):
                try:
                    clim = build_climatology(WeeklySeries(self.grid, values))
                except InsufficientClimatologyError as e:
                    failure = e
                    log_event(logger, "indices", self.region_id, ReasonCode.INSUFFICIENT_DATA, level=logging.DEBUG,
                              unit=u, detail=str(e))
                    self._unit_climatologies.append(None)
                    excluded += 1
                    continue
                self._unit_climatologies.append(clim)
                self._unit_vci[u] = self._vci(values, self.weeks, clim)
            if excluded:
                log_event(logger, "indices", self.region_id, ReasonCode.INSUFFICIENT_DATA,
                          excluded_pixels=excluded, pixels=len(self._units))
            if excluded == len(self._units):
                raise failure
            vci = aggregate_values(self._unit_vci, self.preprocessor.unit_min_count)
        else:
            if climatology is None:
                raise failure
            vci = self._vci(ndvi, self.weeks, climatology)

        indices = region_indices(self.region_id, self.grid, ndvi, vci, climatology)
        self._truth = RegionTruth(self.region_id, indices, climatology, self.sample_set.pixel_count, excluded)
        return self._truth

    def _vci(self, ndvi: np.ndarray, weeks: np.ndarray, clim: Climatology) -> np.ndarray:
        result = vci_values(ndvi, weeks, clim, self.cfg.degenerate_week_policy)
        return result.values

    def view(self, issue_index: int) -> dict[IndexKind, IndexSeries]:
        """
        Index series as they would have been computed at ``issue_index``.

        The result lives on the grid prefix ending at the issue slot and depends
        on no observation dated after it.
        """
        truth = self.truth()
        stop = issue_index + 1
        units = self._units[:, :stop].copy()
        unit_vci = self._unit_vci[:, :stop].copy() if self.pixel_mode else None
        for u in range(self.preprocessor.unit_count):
            start, tail = self.preprocessor.tail(u, issue_index)
            units[u, start:] = tail
            if unit_vci is not None and self._unit_climatologies[u] is not None:
                unit_vci[u, start:] = self._vci(tail, self.weeks[start:stop], self._unit_climatologies[u])

        grid = self.grid.sub_grid(0, stop)
        ndvi = aggregate_values(units, self.preprocessor.unit_min_count)
        if self.pixel_mode:
            vci = aggregate_values(unit_vci, self.preprocessor.unit_min_count)
        else:
            vci = self._vci(ndvi, self.weeks[:stop], truth.climatology)
        return region_indices(self.region_id, grid, ndvi, vci, truth.climatology)

    def clear_fraction(self) -> np.ndarray:
        return self.sample_set.clear_fraction()


@dataclass
class RegionForecasts:
    region_id: str
    records: list[ForecastRecord] = field(default_factory=list)
    skipped: Counter = field(default_factory=Counter)


def issue_indices(cfg: PipelineConfig, length: int) -> range:
    """Assessed issue slots: after the burn-in, every ``issue_stride`` weeks, with the shortest lead on the grid."""
    return range(cfg.effective_burn_in, length - min(cfg.leads), cfg.issue_stride)


def issue_model(view: IndexSeries, issue_index: int, cfg: PipelineConfig, warm_start: GPModel | None = None,
                model_cache: StageCache | None = None, data_key: str = "") -> GPModel | NoForecast:
    """
    The GP forecaster fitted at one issue slot, read from ``model_cache`` when
    the same fit was stored before.

    ``data_key`` names the data the view was computed from; fits are only cached
    when it is given. The cache key also covers the GP settings, the seed and
    the warm-start hyperparameters, so a stored fit is exactly the one a refit
    would produce.
    """
    settings = cfg.gp_forecast_settings()
    seed = sub_seed(cfg.seed, "gp", view.region_id, view.kind.value, issue_index)
    key = None
    if model_cache is not None and data_key:
        warm = None if warm_start is None else [float(t) for t in warm_start.theta]
        key = content_key("gpfit", data_key, view.region_id, view.kind.value, issue_index, seed, settings, warm)
        cached = model_cache.get(key)
        if cached is not None:
            return cached
    fit = fit_issue_model(view, issue_index, seed=seed, warm_start=warm_start, **settings)
    if key is not None and isinstance(fit, GPModel):
        model_cache.set(key, fit)
    return fit


def forecast_region(processor: RegionProcessor, cfg: PipelineConfig, issues=None,
                    model_cache: StageCache | None = None, data_key: str = "") -> RegionForecasts:
    """
    Run every configured forecaster at every assessed issue date of a region.

    A record is produced for each (issue, lead, index, method) whose forecaster
    preconditions hold and whose target week has a truth value; the rest are
    counted by reason. GP fits go through :func:`issue_model`.
    """
    truth = processor.truth()
    grid = processor.grid
    length = grid.length
    methods = [Method.from_string(m) for m in cfg.methods]
    kinds = [IndexKind.from_string(k) for k in cfg.index_kinds]
    leads = sorted({int(n) for n in cfg.leads})
    ar_configs = {lead: cfg.ar_config(lead) for lead in leads}
    clear = processor.clear_fraction()
    result = RegionForecasts(processor.region_id)
    previous_fit: dict[IndexKind, GPModel] = {}

    for i in (issue_indices(cfg, length) if issues is None else issues):
        targets = [lead for lead in leads if i + lead < length]
        if not targets:
            continue
        views = processor.view(i)
        issue_date = grid.slot_date(i)
        for kind in kinds:
            observed = truth.series_of(kind)
            view = views.get(kind)
            if observed is None or view is None:
                result.skipped[(kind.value, "*", ReasonCode.INSUFFICIENT_DATA.value)] += len(targets) * len(methods)
                continue
            gp_fit = None
            for lead in targets:
                target = observed.value_at(i + lead)
                if target is None:
                    result.skipped[(kind.value, "*", ReasonCode.GAP.value)] += len(methods)
                    continue
                for method in methods:
                    if method is Method.AR:
                        predicted = ar_forecast(view, issue_date, ar_configs[lead])
                    elif method is Method.PERSISTENCE:
                        predicted = persistence_forecast(view, issue_date, lead)
                    else:
                        if gp_fit is None:
                            gp_fit = issue_model(view, i, cfg, previous_fit.get(kind), model_cache, data_key)
                            if isinstance(gp_fit, GPModel):
                                previous_fit[kind] = gp_fit
                        if isinstance(gp_fit, NoForecast):
                            predicted = gp_fit
                        else:
                            predicted = float(predict_arrays(gp_fit, [i + lead])[0][0])
                    if isinstance(predicted, NoForecast):
                        result.skipped[(kind.value, method.value, predicted.reason.value)] += 1
                        continue
                    result.records.append(ForecastRecord(
                        processor.region_id, issue_date, lead, float(predicted), float(target), method, kind,
                        truth_at_issue=observed.value_at(i), clear_fraction=float(clear[i])))
    if result.skipped:
        summary = ", ".join(f"{k[1]}/{k[0]}/{k[2]}={v}" for k, v in sorted(result.skipped.items()))
        logger.info("region %s: %d records, skipped %s", processor.region_id, len(result.records), summary)
    return result
