from .kernels import (Primitive, PRIMITIVES, PERIOD_WEEKS, build_kernel, parse_structure, canonical_structure,
                      free_hyperparameters, is_psd)
from .linalg import jitchol, cho_solve, log_det
from .model import (GPModel, gp_fit, gp_predict, predict_arrays, log_marginal_likelihood, condition,
                    initial_thetas, MIN_TRAINING_POINTS)
from .search import KernelCandidate, kernel_search, candidate_structures, rank_candidates, candidates_frame
from .gapfill import GapFillMode, GapFillModeKind, gp_gapfill
from .forecast import gp_forecast, fit_issue_model, FORECASTABLE_KINDS
from .model_io import model_to_text, model_from_text, save_model, load_model, kernel_parameters
from vegcast.core import GPFitError, ConditioningError
