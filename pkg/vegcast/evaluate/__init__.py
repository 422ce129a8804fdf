from .metrics import (BiasFit, r2_score, s_metric, rmse, bias_regression, match_records, persistence_ratio,
                      skill_by_lead, median_skill_by_lead)
from .roc import (ROCPoint, TransitionPoint, ROC_COLUMNS, default_thresholds, contingency_table, roc_curve, roc_auc,
                  roc_frame, transition_skill, transition_frame)
from .breakdown import (ClearPixelResult, breakdown_rmse, read_region_groups, coverage_report, forecastable_issues,
                        clear_pixel_correlation)
from .report import SkillReport, build_skill_report, write_skill_report, records_frame, write_records, read_records
