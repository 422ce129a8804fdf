from .base_pipeline import BasePipeline
from .preprocessors import BasePreprocessor, InterpolationPreprocessor, GPPreprocessor, register_preprocessor
from .region import (RegionProcessor, RegionTruth, RegionForecasts, forecast_region, issue_indices, issue_model,
                     region_indices)
from .pipeline import (ForecastPipeline, PipelineResult, StageFailure, evaluate_records, coverage_by_lead)
from .lmax import lmax_tradeoff
