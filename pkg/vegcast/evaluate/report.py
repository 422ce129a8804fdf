import logging
import os
from dataclasses import dataclass, field
from datetime import date

import pandas as pd

from vegcast.core import (ForecastRecord, IndexKind, Method, ReasonCode, UndefinedMetricError, ALERT_THRESHOLD,
                          is_boundary_value)
from vegcast.utils import log_event, save_frame, save_json
from .breakdown import ClearPixelResult, breakdown_rmse, clear_pixel_correlation
from .metrics import (BiasFit, bias_regression, median_skill_by_lead, persistence_ratio, r2_score, rmse, s_metric,
                      skill_by_lead)
from .roc import ROCPoint, TransitionPoint, roc_auc, roc_curve, roc_frame, transition_frame, transition_skill

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ["region_id", "issue_date", "lead", "method", "kind", "predicted", "truth", "truth_at_issue",
                  "clear_fraction"]


def records_frame(records: list[ForecastRecord]) -> pd.DataFrame:
    """Records as a table sorted by region, issue date, lead and method."""
    rows = [[r.region_id, r.issue_date.isoformat(), r.lead, str(r.method), str(r.kind), r.predicted, r.truth,
             r.truth_at_issue, r.clear_fraction]
            for r in sorted(records, key=lambda r: (r.region_id, r.issue_date, r.lead, r.method.value, r.kind.value))]
    return pd.DataFrame(rows, columns=RECORD_COLUMNS)


def write_records(records: list[ForecastRecord], filename: str):
    save_frame(records_frame(records), filename)


def read_records(filename: str) -> list[ForecastRecord]:
    """Read records written by :func:`write_records`."""
    frame = pd.read_csv(filename, dtype={"region_id": str, "issue_date": str}, float_precision="round_trip")

    def optional(value):
        return None if pd.isna(value) else float(value)

    return [ForecastRecord(region_id=row.region_id, issue_date=date.fromisoformat(row.issue_date),
                           lead=int(row.lead), predicted=float(row.predicted), truth=float(row.truth),
                           method=Method.from_string(row.method),
                           kind=IndexKind.from_string(row.kind), truth_at_issue=optional(row.truth_at_issue),
                           clear_fraction=optional(row.clear_fraction))
            for row in frame.itertuples(index=False)]


@dataclass
class SkillReport:
    """
    Skill of one forecaster on one index, across regions and leads.

    Attributes
    ----------
    method, kind
        Which forecaster and index.
    leads : list[int]
        Leads that have records, ascending.
    summary : dict[int, dict]
        Per lead: record count, R²-score, S, RMSE, bias fit, persistence ratio and ROC areas.
    skill : pandas.DataFrame
        Per (region, lead) skill, see :func:`skill_by_lead`.
    median_skill : pandas.DataFrame
        Median across regions per lead.
    roc : dict[tuple[int, float], list[ROCPoint]]
        ROC curves keyed by (lead, drought threshold).
    transitions : dict[int, list[TransitionPoint]]
        Transition skill at the alert threshold per lead.
    breakdowns : dict[str, pandas.DataFrame]
        RMSE tables per breakdown, all leads pooled.
    clear_pixel : ClearPixelResult | None
        RMSE against clear pixel percentage at the diagnostic lead.
    boundary_values : int
        Records whose truth sits exactly on a category boundary.
    """

    method: Method
    kind: IndexKind
    leads: list[int] = field(default_factory=list)
    summary: dict[int, dict] = field(default_factory=dict)
    skill: pd.DataFrame = None
    median_skill: pd.DataFrame = None
    roc: dict[tuple[int, float], list[ROCPoint]] = field(default_factory=dict)
    transitions: dict[int, list[TransitionPoint]] = field(default_factory=dict)
    breakdowns: dict[str, pd.DataFrame] = field(default_factory=dict)
    clear_pixel: ClearPixelResult | None = None
    boundary_values: int = 0

    @property
    def name(self) -> str:
        return f"{self.kind.value.lower()}/{self.method.value.lower()}"


def _bias_dict(fit: BiasFit) -> dict:
    return {"slope": fit.slope, "slope_stderr": fit.slope_stderr, "intercept": fit.intercept,
            "intercept_stderr": fit.intercept_stderr, "n": fit.n}


def build_skill_report(records: list[ForecastRecord], method: Method, kind: IndexKind,
                       persistence_records: list[ForecastRecord] | None = None,
                       drought_thresholds=(ALERT_THRESHOLD,), groups: dict[str, str] | None = None,
                       diagnostic_lead: int = 4) -> SkillReport:
    """
    Evaluate one forecaster's records for one index.

    ROC curves, transition skill and the category breakdown are produced for
    VCI3M only, where the drought categories are defined.
    """
    records = [r for r in records if r.method is method and r.kind is kind]
    report = SkillReport(method, kind)
    report.skill = skill_by_lead(records)
    report.median_skill = median_skill_by_lead(report.skill)
    if not records:
        logger.warning("no %s records for %s", kind, method)
        return report

    on_scale = kind is IndexKind.VCI3M
    by_lead: dict[int, list[ForecastRecord]] = {}
    for record in records:
        by_lead.setdefault(record.lead, []).append(record)
    report.leads = sorted(by_lead)

    for lead in report.leads:
        subset = by_lead[lead]
        entry = {"n": len(subset), "r2_score": r2_score(subset), "s_metric": s_metric(subset),
                 "rmse": rmse(subset), "bias": _bias_dict(bias_regression(subset))}
        if persistence_records is not None and method is not Method.PERSISTENCE:
            reference = [r for r in persistence_records if r.lead == lead and r.kind is kind]
            entry["persistence_ratio"] = persistence_ratio(subset, reference)
        if on_scale:
            areas = {}
            for threshold in drought_thresholds:
                try:
                    points = roc_curve(subset, threshold)
                except UndefinedMetricError as e:
                    log_event(logger, "evaluate", None, ReasonCode.DEGENERATE_METRIC, method=method.value,
                              lead=lead, detail=str(e))
                    continue
                report.roc[(lead, float(threshold))] = points
                areas[f"{threshold:g}"] = roc_auc(points)
            entry["roc_auc"] = areas
            report.transitions[lead] = transition_skill(subset, drought_thresholds[0])
            operating = report.transitions[lead][0]
            entry["transition"] = {"hit_rate": operating.hit_rate, "false_alarm_ratio": operating.false_alarm_ratio,
                                   "transitions": operating.transitions}
        report.summary[lead] = entry

    kinds = ("category", "week_of_year", "region") if on_scale else ("week_of_year", "region")
    for by in kinds:
        report.breakdowns[by] = breakdown_rmse(records, by)
    if groups:
        report.breakdowns["group"] = breakdown_rmse(records, "region", groups)

    lead = diagnostic_lead if diagnostic_lead in by_lead else report.leads[0]
    report.clear_pixel = clear_pixel_correlation(by_lead[lead])

    if on_scale:
        report.boundary_values = sum(is_boundary_value(r.truth) for r in records)
        if report.boundary_values:
            log_event(logger, "evaluate", None, ReasonCode.BOUNDARY_VALUE, level=logging.INFO,
                      method=method.value, count=report.boundary_values)
    return report


def write_skill_report(report: SkillReport, directory: str) -> str:
    """
    Write a report as CSV tables and a JSON summary under ``directory/<kind>/<method>``.

    Returns
    -------
    str
        The report directory.
    """
    target = os.path.join(directory, report.kind.value.lower(), report.method.value.lower())
    save_frame(report.skill, os.path.join(target, "skill_by_lead.csv"))
    save_frame(report.median_skill, os.path.join(target, "median_skill_by_lead.csv"))
    for by, table in sorted(report.breakdowns.items()):
        save_frame(table, os.path.join(target, f"rmse_by_{by}.csv"))
    for (lead, threshold), points in sorted(report.roc.items()):
        save_frame(roc_frame(points), os.path.join(target, f"roc_lead{lead:02d}_t{threshold:g}.csv"))
    for lead, points in sorted(report.transitions.items()):
        save_frame(transition_frame(points), os.path.join(target, f"transition_lead{lead:02d}.csv"))

    summary = {"method": report.method.value, "kind": report.kind.value, "leads": report.leads,
               "by_lead": {str(lead): entry for lead, entry in sorted(report.summary.items())},
               "boundary_values": report.boundary_values}
    if report.clear_pixel is not None:
        save_frame(report.clear_pixel.table, os.path.join(target, "rmse_by_clear_pct.csv"))
        summary["clear_pixel_pearson_r"] = report.clear_pixel.pearson_r
    save_json(summary, os.path.join(target, "summary.json"))
    return target
