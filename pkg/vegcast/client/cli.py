import argparse
import dataclasses
import logging
import os
import sys
import typing
from datetime import date

import numpy as np
import pandas as pd

from vegcast.ar import granger_matrix
from vegcast.config import PipelineConfig, parse_value
from vegcast.core import (ConfigError, IndexKind, IndexSeries, InvalidInputError, InvalidValueError, ReasonCode,
                          VegcastError)
from vegcast.evaluate import read_records, write_records, write_skill_report
from vegcast.gapfill import compare_interpolators, preprocess, scores_frame
from vegcast.gp import MIN_TRAINING_POINTS, PRIMITIVES, Primitive, candidates_frame, kernel_search
from vegcast.indices import (build_climatology, compute_ndvi_anomaly, compute_vci, compute_vci3m,
                             write_climatology)
from vegcast.ingest import read_regional_series, write_regional_series
from vegcast.pipeline import ForecastPipeline, coverage_by_lead, evaluate_records, lmax_tradeoff
from vegcast.synth import Coupling, SyntheticSpec, generate_synthetic
from vegcast.utils import log_event, parse_date, save_frame, sub_seed

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"
COMMANDS = ("ingest", "gapfill", "indices", "forecast", "evaluate", "granger", "kernel-search", "synth", "run")


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _config_fields(cls) -> list[dataclasses.Field]:
    return [f for f in dataclasses.fields(cls) if not f.name.startswith("cc_") and not f.name.startswith("_")]


def add_config_arguments(parser: argparse.ArgumentParser):
    """``--config`` plus one flag per ``PipelineConfig`` key, kept as raw strings until loaded."""
    parser.add_argument("--config", help="key=value configuration file")
    group = parser.add_argument_group("configuration overrides")
    for f in _config_fields(PipelineConfig):
        comment = PipelineConfig.__dataclass_fields__.get(f"cc_{f.name}")
        group.add_argument(_flag(f.name), dest=f"cfg_{f.name}", default=None, metavar="VALUE",
                           help=None if comment is None else comment.default)


def load_config(args: argparse.Namespace) -> PipelineConfig:
    """
    Default values, then the config file, then the command line flags.

    Raises
    ------
    ConfigError
        On an unreadable file, unknown key or invalid value.
    """
    cfg = PipelineConfig()
    if args.config:
        cfg.load(args.config)
    overrides = {key[4:]: value for key, value in vars(args).items()
                 if key.startswith("cfg_") and value is not None}
    if overrides:
        cfg.apply_overrides(overrides, source="command line")
    return cfg


def add_synth_arguments(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("generator parameters")
    for f in _config_fields(SyntheticSpec):
        if f.name == "couplings":
            continue
        group.add_argument(_flag(f.name), dest=f"spec_{f.name}", default=None, metavar="VALUE")
    parser.add_argument("--coupling", action="append", default=[], metavar="SOURCE:TARGET:COEF[:LAG]",
                        help="Couple the anomaly of TARGET to SOURCE (repeatable)")
    parser.add_argument("--output", required=True, help="Directory of the synthetic bundle")


def parse_coupling(text: str) -> Coupling:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"coupling must be SOURCE:TARGET:COEF[:LAG], got {text!r}")
    try:
        return Coupling(parts[0], parts[1], float(parts[2]), int(parts[3]) if len(parts) == 4 else 4)
    except ValueError as e:
        raise ConfigError(f"bad coupling {text!r}: {e}") from None


def synthetic_spec(args: argparse.Namespace) -> SyntheticSpec:
    hints = typing.get_type_hints(SyntheticSpec)
    values = {}
    for key, value in vars(args).items():
        if not key.startswith("spec_") or value is None:
            continue
        name = key[5:]
        try:
            values[name] = parse_date(value) if hints[name] is date else parse_value(value, hints[name])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad value for {name}: {e}") from None
    values["couplings"] = tuple(parse_coupling(c) for c in args.coupling)
    return SyntheticSpec(**values)


class CLI:
    """
    Command line interface of the forecasting pipeline.

    Every subcommand reads the same flat configuration; ``run`` executes all
    stages, the others execute one stage and write its outputs under
    ``output_dir``.
    """

    def __init__(self):
        self.parser = self.build_parser()
        self.commands = {"ingest": self.ingest, "gapfill": self.gapfill, "indices": self.indices,
                         "forecast": self.forecast, "evaluate": self.evaluate, "granger": self.granger,
                         "kernel-search": self.search_kernels, "run": self.run_pipeline}

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog="vegcast", description="Vegetation condition forecasting")
        sub = parser.add_subparsers(dest="command", required=True)

        for name, text in (("ingest", "Composite observations into weekly pixel and regional series"),
                           ("forecast", "Forecast every region, index, method and lead"),
                           ("run", "Run the full pipeline and write the report bundle")):
            add_config_arguments(sub.add_parser(name, help=text))

        p = sub.add_parser("gapfill", help="Fill and smooth regional NDVI series")
        add_config_arguments(p)
        p.add_argument("--series", help="Regional series CSV (default: <output_dir>/series/ndvi_raw.csv)")
        p.add_argument("--compare-drop", type=int, default=0, metavar="N",
                       help="Also score the interpolators by hiding N present values per region")
        p.add_argument("--lmax-candidates", default="", metavar="L1,L2,...",
                       help="Also tabulate skill against coverage for these fill lengths")

        p = sub.add_parser("indices", help="Climatology, VCI, VCI3M and NDVI anomaly")
        add_config_arguments(p)
        p.add_argument("--series", help="Filled regional NDVI CSV; without it the indices are built from the input")

        p = sub.add_parser("evaluate", help="Skill reports from a forecast record file")
        add_config_arguments(p)
        p.add_argument("--records", help="Record CSV (default: <output_dir>/records/forecasts.csv)")
        p.add_argument("--series", help="Regional VCI3M CSV for the coverage table")

        p = sub.add_parser("granger", help="Inter-region Granger analysis of regional series")
        add_config_arguments(p)
        p.add_argument("--series", help="Regional VCI3M CSV (default: <output_dir>/series/vci3m.csv)")

        p = sub.add_parser("kernel-search", help="Rank GP kernel structures on gap-filled regional series")
        add_config_arguments(p)
        p.add_argument("--series", help="Regional series CSV (default: <output_dir>/series/ndvi_filled.csv)")
        p.add_argument("--region", default="", help="Search one region only")
        p.add_argument("--primitives", default="", metavar="P1,P2,...",
                       help="Primitive kernels to combine (default: all)")
        p.add_argument("--last-weeks", type=int, default=0, metavar="N",
                       help="Fit on the most recent N weeks only (0 = whole series)")

        p = sub.add_parser("synth", help="Write a synthetic benchmark")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--log-level", default="INFO")
        add_synth_arguments(p)
        return parser

    def run(self, argv: list[str] | None = None) -> int:
        """
        Parse ``argv`` and execute the subcommand.

        Returns
        -------
        int
            0 on success, 1 usage error, 2 data error, 3 numerical failure.
        """
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return 0 if e.code in (0, None) else 1

        try:
            if args.command == "synth":
                setup_logging(args.log_level)
                return self.synth(args)
            cfg = load_config(args)
            setup_logging(cfg.log_level)
            return self.commands[args.command](cfg, args)
        except VegcastError as e:
            logger.error("%s: %s", type(e).__name__, e)
            return e.exit_code
        except Exception:
            logger.exception("unexpected failure")
            return 3

    # -- subcommands ------------------------------------------------------------

    def ingest(self, cfg: PipelineConfig, args) -> int:
        pipeline = ForecastPipeline(cfg)
        pipeline.write_ingest()
        print(f"{len(pipeline.regions)} regions written to {os.path.join(cfg.output_dir, 'series')}")
        return 0

    def gapfill(self, cfg: PipelineConfig, args) -> int:
        filename = args.series or os.path.join(cfg.output_dir, "series", "ndvi_raw.csv")
        series = _read_series(filename)
        gapfill = cfg.gapfill_config()
        filled = {}
        for region_id, raw in sorted(series.items()):
            warnings = []
            filled[region_id] = preprocess(raw, gapfill, warnings)
            for w in warnings:
                log_event(logger, "gapfill", region_id, ReasonCode.GAP, start=w.start_date.isoformat(),
                          length=w.length, detail=w.reason)
        out = os.path.join(cfg.output_dir, "series", "ndvi_filled.csv")
        write_regional_series(filled, out)

        if args.compare_drop:
            scores = compare_interpolators(list(series.values()), args.compare_drop, cfg.seed)
            save_frame(scores_frame(scores), os.path.join(cfg.output_dir, "reports", "interpolators.csv"))
        if args.lmax_candidates:
            candidates = [int(c) for c in args.lmax_candidates.split(",") if c.strip()]
            pipeline = ForecastPipeline(cfg)
            table = lmax_tradeoff(pipeline.ingest(), candidates, lead=cfg.granger_lead, gapfill=gapfill,
                                  first_issue=cfg.effective_burn_in, stride=cfg.issue_stride)
            save_frame(table, os.path.join(cfg.output_dir, "reports", "lmax_tradeoff.csv"))
        print(f"{len(filled)} filled series written to {out}")
        return 0

    def indices(self, cfg: PipelineConfig, args) -> int:
        if not args.series:
            pipeline = ForecastPipeline(cfg)
            truths = pipeline.truths()
            if not truths:
                raise InvalidInputError("no region has enough data for the indices")
            pipeline.write_truths(truths)
            print(f"indices of {len(truths)} regions written to {cfg.output_dir}")
            return 0

        by_kind = {IndexKind.VCI: {}, IndexKind.VCI3M: {}, IndexKind.NDVI_ANOMALY: {}}
        for region_id, ndvi in sorted(_read_series(args.series).items()):
            clim = build_climatology(ndvi)
            vci = compute_vci(ndvi, clim, region_id, cfg.degenerate_week_policy)
            by_kind[IndexKind.VCI][region_id] = vci.series
            by_kind[IndexKind.VCI3M][region_id] = compute_vci3m(vci, ndvi).series
            by_kind[IndexKind.NDVI_ANOMALY][region_id] = compute_ndvi_anomaly(ndvi, clim, region_id).series
            write_climatology(clim, os.path.join(cfg.output_dir, "climatology", f"{region_id}.csv"))
        for kind, series in by_kind.items():
            write_regional_series(series, os.path.join(cfg.output_dir, "series", f"{kind.value.lower()}.csv"))
        print(f"indices of {len(by_kind[IndexKind.VCI])} regions written to {cfg.output_dir}")
        return 0

    def forecast(self, cfg: PipelineConfig, args) -> int:
        pipeline = ForecastPipeline(cfg)
        truths = pipeline.truths()
        if not truths:
            raise InvalidInputError("no region has enough data for the indices")
        pipeline.write_truths(truths)
        records = sorted((r for f in pipeline.forecasts(sorted(truths)) for r in f.records),
                         key=lambda r: (r.region_id, r.issue_date, r.lead, r.method.value, r.kind.value))
        out = os.path.join(cfg.output_dir, "records", "forecasts.csv")
        write_records(records, out)
        print(f"{len(records)} forecast records written to {out}")
        return 0

    def evaluate(self, cfg: PipelineConfig, args) -> int:
        filename = args.records or os.path.join(cfg.output_dir, "records", "forecasts.csv")
        if not os.path.exists(filename):
            raise InvalidInputError(f"record file {filename} does not exist")
        records = read_records(filename)
        reports_dir = os.path.join(cfg.output_dir, "reports")
        for report in evaluate_records(records, cfg):
            write_skill_report(report, reports_dir)
            for lead in report.leads:
                summary = report.summary.get(lead, {})
                print(f"{report.name} lead {lead}: R2={summary.get('r2_score', float('nan')):.3f} "
                      f"S={summary.get('s_metric', float('nan')):.1f}")
        if args.series:
            save_frame(coverage_by_lead(_read_series(args.series), cfg), os.path.join(reports_dir, "coverage.csv"))
        return 0

    def granger(self, cfg: PipelineConfig, args) -> int:
        filename = args.series or os.path.join(cfg.output_dir, "series", "vci3m.csv")
        series = [IndexSeries(s, IndexKind.VCI3M, r) for r, s in sorted(_read_series(filename).items())]
        matrix = granger_matrix(series, cfg.ar_config(cfg.granger_lead), threshold_pct=cfg.granger_threshold,
                                min_coverage_pct=cfg.granger_min_coverage)
        save_frame(matrix.to_frame(), os.path.join(cfg.output_dir, "reports", "granger.csv"))
        for entry in matrix.present():
            print(f"{entry.source} -> {entry.target}: {entry.pct_reduction:.1f}% over {entry.windows} windows")
        return 0

    def search_kernels(self, cfg: PipelineConfig, args) -> int:
        if args.last_weeks < 0:
            raise ConfigError(f"--last-weeks must be >= 0, got {args.last_weeks}")
        try:
            primitives = [Primitive.from_string(p) for p in args.primitives.split(",") if p.strip()] or PRIMITIVES
        except InvalidValueError as e:
            raise ConfigError(str(e)) from None
        filename = args.series or os.path.join(cfg.output_dir, "series", "ndvi_filled.csv")
        series = _read_series(filename)
        if args.region and args.region not in series:
            raise InvalidInputError(f"region {args.region!r} is not in {filename}")

        frames = []
        for region_id in [args.region] if args.region else sorted(series):
            weekly = series[region_id]
            first = max(0, weekly.grid.length - args.last_weeks) if args.last_weeks else 0
            present = np.flatnonzero(~np.isnan(weekly.values[first:])) + first
            if len(present) < MIN_TRAINING_POINTS:
                log_event(logger, "kernel_search", region_id, ReasonCode.INSUFFICIENT_DATA, points=len(present))
                continue
            ranked = kernel_search(present.astype(float), weekly.values[present], primitives, restarts=cfg.restarts,
                                   seed=sub_seed(cfg.seed, "kernel_search", region_id), region_id=region_id)
            frame = candidates_frame(ranked)
            frame.insert(0, "region_id", region_id)
            frames.append(frame)
            print(f"{region_id}: best structure {ranked[0].structure}")
        if not frames:
            raise InvalidInputError(f"no region in {filename} has {MIN_TRAINING_POINTS} present values")
        out = os.path.join(cfg.output_dir, "reports", "kernel_search.csv")
        save_frame(pd.concat(frames, ignore_index=True), out)
        print(f"ranked kernels of {len(frames)} regions written to {out}")
        return 0

    def synth(self, args) -> int:
        bundle = generate_synthetic(synthetic_spec(args), args.seed, args.output)
        print(f"{len(bundle.observation_files)} regions written to {bundle.observations_dir}")
        return 0

    def run_pipeline(self, cfg: PipelineConfig, args) -> int:
        result = ForecastPipeline(cfg).run_pipeline()
        if result.ok:
            print(f"report bundle written to {result.output_dir}")
        return result.exit_code


def _read_series(filename: str):
    if not os.path.exists(filename):
        raise InvalidInputError(f"series file {filename} does not exist")
    return read_regional_series(filename)


def setup_logging(level: str = "INFO"):
    """Console logging for the command line; the level name comes from ``log_level``."""
    numeric = logging.getLevelName(str(level).upper())
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level {level!r}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, datefmt="%Y-%m-%d %H:%M:%S", force=True)


def main(argv: list[str] | None = None):
    sys.exit(CLI().run(argv))
