from .model import ARConfig, ARModel, ar_fit, lag_design, solve_least_squares
from .forecast import ar_forecast, persistence_forecast, forecastable, fit_at
from .granger import (GrangerFit, GrangerEntry, GrangerMatrix, granger_fit, granger_matrix, region_coverage,
                      DEFAULT_THRESHOLD_PCT, DEFAULT_MIN_COVERAGE_PCT)
