from .config import GapFillConfig, Interpolator, FillWarning
from .interpolators import BaseInterpolator, register_interpolator, NoSupportError, support_points
from .smoothing import fill_gaps, savitzky_golay, preprocess
from .compare import compare_interpolators, InterpolatorScore, scores_frame, DEFAULT_METHODS
from .forecast_mode import ForecastModeBuilder
