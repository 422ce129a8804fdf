import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import pandas as pd
from tqdm import tqdm

import vegcast
from vegcast.ar import GrangerMatrix, granger_matrix
from vegcast.config import PipelineConfig
from vegcast.core import (ForecastRecord, IndexKind, IndexSeries, InsufficientClimatologyError, InvalidInputError,
                          Method, ObservationSeries, ReasonCode, VegcastError, WeeklySeries)
from vegcast.evaluate import (SkillReport, build_skill_report, coverage_report, read_region_groups, write_records,
                              write_skill_report)
from vegcast.indices import build_climatology, write_climatology
from vegcast.ingest import (RegionSampleSet, aggregate_region, build_region_sets, grid_for, load_observations,
                            observation_files, write_regional_series)
from vegcast.storage import StageCache, content_key, fingerprint_files
from vegcast.utils import Stopwatch, get_storage_location, log_event, save_frame, save_json, save_text

from .base_pipeline import BasePipeline
from .region import RegionForecasts, RegionProcessor, RegionTruth, TRUTH_KINDS, forecast_region

logger = logging.getLogger(__name__)

LOG_FILE = "pipeline.log"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"

# config keys each cached stage depends on
TRUTH_KEYS = ("style", "climatology_mode", "l_max", "interpolator", "savgol_window", "savgol_order",
              "gapfill_kernel", "restarts", "min_pixels_for_aggregate", "anchor_weekday", "degenerate_week_policy",
              "seed")
FORECAST_KEYS = ("methods", "index_kinds", "leads", "order", "train_length", "demean", "demean_source",
                 "strict_window", "kernel", "restarts", "gp_min_history", "gp_train_length", "burn_in",
                 "issue_stride", "seed")


@dataclass
class PipelineResult:
    """
    Outcome of a pipeline run.

    Attributes
    ----------
    exit_code : int
        0 on success, 1 usage error, 2 data error, 3 numerical failure.
    output_dir : str
        Where the bundle was written.
    regions : list[str]
        Regions that produced truth series.
    skipped_regions : dict[str, str]
        Regions left out, with the reason.
    records : list[ForecastRecord]
        Every forecast record, sorted.
    reports : list[SkillReport]
        One per (index, method).
    granger : GrangerMatrix | None
        Inter-region analysis, when enabled and possible.
    coverage : pandas.DataFrame | None
        AR forecastable-week percentages per region and lead.
    error : str | None
        Message of the hard error that stopped the run.
    """

    exit_code: int = 0
    output_dir: str = ""
    regions: list[str] = field(default_factory=list)
    skipped_regions: dict[str, str] = field(default_factory=dict)
    records: list[ForecastRecord] = field(default_factory=list)
    reports: list[SkillReport] = field(default_factory=list)
    granger: GrangerMatrix | None = None
    coverage: pd.DataFrame | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.exit_code == 0


class StageFailure(VegcastError):
    """A hard error inside a stage, tagged with where it happened."""

    def __init__(self, stage: str, region: str | None, cause: VegcastError):
        self.stage = stage
        self.region = region
        self.cause = cause
        self.exit_code = cause.exit_code
        super().__init__(f"stage {stage}{f' region {region}' if region else ''}: {cause}")


class ForecastPipeline(BasePipeline):
    """
    The full vegetation condition forecasting pipeline.

    Stages, in order: ingest (read and composite observations), preprocess and
    indices (truth series per region), forecast (every method, lead and index at
    every assessed issue date), evaluate (skill reports, coverage, Granger).

    Pipeline:
        Input: observation CSVs
            ↓
        Ingest      (weekly composites per pixel, grouped by region)
            ↓
        Preprocess  (interpolation + smoothing, or GP gap-filling)
            ↓
        Indices     (climatology, VCI, VCI3M, NDVI anomaly)
            ↓
        Forecast    (AR, GP, persistence at each issue date, forecast mode)
            ↓
        Evaluate    (skill reports, coverage, Granger matrix)
            ↓
        Output: report bundle in ``cfg.output_dir``

    Parameters
    ----------
    cfg : PipelineConfig
        The run configuration.
    cache : StageCache, optional
        Stage cache; defaults to ``cfg.cache_dir`` or the platform data directory.
    """

    def __init__(self, cfg: PipelineConfig, cache: StageCache | None = None):
        self.cfg = cfg
        self.output_dir = cfg.output_dir
        if cache is None:
            cache_dir = cfg.cache_dir or os.path.join(get_storage_location("vegcast", create=True), "cache")
            cache = StageCache(cache_dir)
        self.cache = cache
        self._observations: dict[str, list[ObservationSeries]] | None = None
        self._sample_sets: dict[str, RegionSampleSet] | None = None
        self._processors: dict[str, RegionProcessor] = {}
        self._fingerprint: str | None = None
        self.skipped_regions: dict[str, str] = {}

    # -- ingest ---------------------------------------------------------------

    def ingest(self) -> dict[str, RegionSampleSet]:
        """
        Read the observations and composite them per pixel onto one weekly grid.

        Raises
        ------
        InvalidInputError
            If the input holds no regions.
        """
        if self._sample_sets is not None:
            return self._sample_sets
        files = observation_files(self.cfg.input_path)
        if not files:
            raise InvalidInputError(f"no regions found: {self.cfg.input_path!r} holds no CSV files")
        observations = load_observations(self.cfg.input_path)
        if not observations:
            raise InvalidInputError(f"no regions found in {self.cfg.input_path!r}")
        grid = grid_for(observations, self.cfg.anchor_weekday)
        self._sample_sets = build_region_sets(observations, grid, self.cfg.min_pixels_for_aggregate)
        self._observations = {}
        for obs in sorted(observations, key=lambda o: o.pixel_id):
            self._observations.setdefault(obs.region_id, []).append(obs)
        self._fingerprint = fingerprint_files(files)
        log_event(logger, "ingest", None, regions=len(self._sample_sets), pixels=len(observations),
                  weeks=grid.length, start=grid.start_date.isoformat())
        return self._sample_sets

    @property
    def regions(self) -> list[str]:
        return sorted(self.ingest())

    def processor(self, region_id: str) -> RegionProcessor:
        if region_id not in self._processors:
            self._processors[region_id] = RegionProcessor(self.cfg, self.ingest()[region_id],
                                                          self._observations[region_id])
        return self._processors[region_id]

    def _map_regions(self, function, regions: list[str], desc: str) -> list:
        """Apply ``function`` to every region on the worker pool, results in region order."""
        if self.cfg.workers == 1:
            return [function(r) for r in tqdm(regions, desc=desc, disable=len(regions) < 2)]
        with ThreadPoolExecutor(max_workers=self.cfg.workers) as executor:
            return list(tqdm(executor.map(function, regions), total=len(regions), desc=desc,
                             disable=len(regions) < 2))

    def _config_part(self, keys) -> dict:
        values = self.cfg.to_dict()
        part = {k: values[k] for k in keys}
        part["burn_in"] = self.cfg.effective_burn_in
        part["version"] = vegcast.__version__
        return part

    # -- preprocess and indices -------------------------------------------------

    def _truth_key(self, region_id: str) -> str:
        return content_key("truth", self._fingerprint, region_id, self._config_part(TRUTH_KEYS))

    def _region_truth(self, region_id: str) -> RegionTruth | None:
        key = self._truth_key(region_id)
        cached = self.cache.get(key)
        sample_set = self.ingest()[region_id]
        if cached is not None:
            indices = {IndexKind.from_string(kind): IndexSeries(series, IndexKind.from_string(kind), region_id)
                       for kind, series in cached.items()}
            climatology = None
            if IndexKind.NDVI_ANOMALY in indices:
                climatology = build_climatology(indices[IndexKind.NDVI].series)
            return RegionTruth(region_id, indices, climatology, sample_set.pixel_count)

        try:
            truth = self.processor(region_id).truth()
        except InsufficientClimatologyError as e:
            log_event(logger, "indices", region_id, ReasonCode.INSUFFICIENT_DATA, detail=str(e))
            self.skipped_regions[region_id] = f"{ReasonCode.INSUFFICIENT_DATA.value}: {e}"
            return None
        except VegcastError as e:
            raise StageFailure("indices", region_id, e) from e
        self.cache.set(key, {kind.value: series.series for kind, series in truth.indices.items()})
        return truth

    def truths(self) -> dict[str, RegionTruth]:
        """Truth series of every region that has enough data for them."""
        results = self._map_regions(self._region_truth, self.regions, "indices")
        return {r: t for r, t in zip(self.regions, results) if t is not None}

    # -- forecast ---------------------------------------------------------------

    def _region_forecasts(self, region_id: str) -> RegionForecasts:
        key = content_key("forecast", self._truth_key(region_id), self._config_part(FORECAST_KEYS))
        cached = self.cache.get(key)
        if cached is not None:
            return RegionForecasts(region_id, cached)
        try:
            result = forecast_region(self.processor(region_id), self.cfg, model_cache=self.cache,
                                     data_key=self._truth_key(region_id))
        except VegcastError as e:
            raise StageFailure("forecast", region_id, e) from e
        self.cache.set(key, result.records)
        return result

    def forecasts(self, regions: list[str]) -> list[RegionForecasts]:
        return self._map_regions(self._region_forecasts, regions, "forecast")

    # -- evaluate ---------------------------------------------------------------

    def evaluate(self, records: list[ForecastRecord], truths: dict[str, RegionTruth]) -> tuple[
            list[SkillReport], pd.DataFrame, GrangerMatrix | None]:
        """Skill reports per (index, method), AR coverage per lead and the Granger matrix."""
        reports = evaluate_records(records, self.cfg)
        vci3m = {r: t.series_of(IndexKind.VCI3M) for r, t in sorted(truths.items())}
        coverage = coverage_by_lead(vci3m, self.cfg)

        granger = None
        if self.cfg.granger:
            series = [t.indices[IndexKind.VCI3M] for _, t in sorted(truths.items())]
            if len(series) < 2:
                logger.info("granger analysis skipped: %d region(s)", len(series))
            else:
                granger = granger_matrix(series, self.cfg.ar_config(self.cfg.granger_lead),
                                         threshold_pct=self.cfg.granger_threshold,
                                         min_coverage_pct=self.cfg.granger_min_coverage)
        return reports, coverage, granger

    # -- outputs ------------------------------------------------------------------

    def write_ingest(self, directory: str | None = None):
        """Write the raw regional aggregates and per-week clear fractions."""
        directory = directory or self.output_dir
        sets = self.ingest()
        write_regional_series({r: aggregate_region(s) for r, s in sets.items()},
                              os.path.join(directory, "series", "ndvi_raw.csv"))
        frames = [pd.DataFrame({"region_id": r, "date": [d.isoformat() for d in s.grid.dates()],
                                "pixels": s.pixel_count, "clear_fraction": s.clear_fraction()})
                  for r, s in sorted(sets.items())]
        save_frame(pd.concat(frames, ignore_index=True), os.path.join(directory, "series", "clear_fraction.csv"))

    def write_truths(self, truths: dict[str, RegionTruth], directory: str | None = None):
        """Write every truth index as one regional CSV per kind, and the regional climatologies."""
        directory = directory or self.output_dir
        for kind in TRUTH_KINDS:
            series = {r: t.series_of(kind) for r, t in sorted(truths.items()) if t.series_of(kind) is not None}
            if series:
                write_regional_series(series, os.path.join(directory, "series", f"{kind.value.lower()}.csv"))
        for region_id, truth in sorted(truths.items()):
            if truth.climatology is not None:
                write_climatology(truth.climatology, os.path.join(directory, "climatology", f"{region_id}.csv"))

    def _write_bundle(self, result: PipelineResult, truths: dict[str, RegionTruth]):
        reports_dir = os.path.join(self.output_dir, "reports")
        write_records(result.records, os.path.join(self.output_dir, "records", "forecasts.csv"))
        for report in result.reports:
            write_skill_report(report, reports_dir)
        save_frame(result.coverage, os.path.join(reports_dir, "coverage.csv"))
        if result.granger is not None:
            save_frame(result.granger.to_frame(), os.path.join(reports_dir, "granger.csv"))

        summary = {
            "style": self.cfg.style,
            "leads": sorted({int(n) for n in self.cfg.leads}),
            "records": len(result.records),
            "regions": {r: {"pixels": t.pixel_count, "records": sum(rec.region_id == r for rec in result.records)}
                        for r, t in sorted(truths.items())},
            "skipped_regions": dict(sorted(result.skipped_regions.items())),
            "boundary_values": {report.name: report.boundary_values for report in result.reports},
        }
        save_json(summary, os.path.join(reports_dir, "summary.json"))
        save_text(self.cfg.dumps(), os.path.join(self.output_dir, "run_config.txt"))

    # -- run ----------------------------------------------------------------------

    def run_pipeline(self) -> PipelineResult:
        """
        Run every stage and write the report bundle.

        Returns
        -------
        PipelineResult
            With a nonzero exit code (and a structured error log line naming the
            stage and region) when a stage fails hard.
        """
        os.makedirs(self.output_dir, exist_ok=True)
        handler = logging.FileHandler(os.path.join(self.output_dir, LOG_FILE), mode="w", encoding="utf-8")
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        package_logger = logging.getLogger("vegcast")
        package_logger.addHandler(handler)
        result = PipelineResult(output_dir=self.output_dir)
        stopwatch = Stopwatch()
        try:
            self.ingest()
            self.write_ingest()
            logger.info("ingest done in %.2fs", stopwatch.step())

            truths = self.truths()
            if not truths:
                raise InvalidInputError("no region has enough data for the indices")
            self.write_truths(truths)
            logger.info("indices done in %.2fs", stopwatch.step())

            forecasts = self.forecasts(sorted(truths))
            result.records = sorted((r for f in forecasts for r in f.records),
                                    key=lambda r: (r.region_id, r.issue_date, r.lead, r.method.value, r.kind.value))
            logger.info("forecast done in %.2fs: %d records", stopwatch.step(), len(result.records))

            result.reports, result.coverage, result.granger = self.evaluate(result.records, truths)
            result.regions = sorted(truths)
            result.skipped_regions = dict(self.skipped_regions)
            self._write_bundle(result, truths)
            logger.info("evaluate done in %.2fs (total %s, cache hits %d)", stopwatch.step(), stopwatch,
                        self.cache.hits)
        except StageFailure as e:
            log_event(logger, e.stage, e.region, None, level=logging.ERROR, error=type(e.cause).__name__,
                      detail=str(e.cause))
            result.exit_code, result.error = e.exit_code, str(e)
        except VegcastError as e:
            log_event(logger, "pipeline", None, None, level=logging.ERROR, error=type(e).__name__, detail=str(e))
            result.exit_code, result.error = e.exit_code, str(e)
        finally:
            package_logger.removeHandler(handler)
            handler.close()
        return result


def evaluate_records(records: list[ForecastRecord], cfg: PipelineConfig) -> list[SkillReport]:
    """One skill report per configured (index, method) pair."""
    groups = read_region_groups(cfg.region_groups_path) if cfg.region_groups_path else None
    persistence = [r for r in records if r.method is Method.PERSISTENCE] or None
    thresholds = [cfg.drought_threshold] + [float(t) for t in cfg.extra_drought_thresholds]
    reports = []
    for kind in sorted({IndexKind.from_string(k) for k in cfg.index_kinds}, key=lambda k: k.value):
        for method in sorted({Method.from_string(m) for m in cfg.methods}, key=lambda m: m.value):
            reports.append(build_skill_report(records, method, kind, persistence, thresholds, groups))
    return reports


def coverage_by_lead(series: dict[str, WeeklySeries], cfg: PipelineConfig) -> pd.DataFrame:
    """AR forecastable-week percentages per region for every configured lead."""
    frames = []
    for lead in sorted({int(n) for n in cfg.leads}):
        frame = coverage_report(series, cfg.ar_config(lead), first_issue=cfg.effective_burn_in)
        frame.insert(1, "lead", lead)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)
