import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from sklearn.gaussian_process.kernels import Kernel

from vegcast.core import ConditioningError, GPFitError, InvalidInputError

from .kernels import VARIANCE_BOUNDS, build_kernel, canonical_structure, free_hyperparameters
from .linalg import cho_solve, jitchol, log_det

logger = logging.getLogger(__name__)

MIN_TRAINING_POINTS = 10
INIT_LENGTH_SCALES = (2.0, 8.0, 26.0)
NOISE_BOUNDS = VARIANCE_BOUNDS
STD_FLOOR = 1e-6
# objective value reported to the optimiser where the Gram matrix cannot be factorised
_PENALTY = 1e25


@dataclass(eq=False)
class GPModel:
    """
    A GP conditioned on training data.

    Attributes
    ----------
    structure : str
        Kernel structure string, e.g. ``"RBF+PERIODIC"``.
    kernel : Kernel
        Kernel with its fitted hyperparameters.
    mean : float
        Constant prior mean (the training-sample mean).
    noise_std : float
        Observation noise standard deviation, > 0.
    times : np.ndarray
        Training times in weeks, strictly increasing.
    values : np.ndarray
        Training values.
    time_offset : float
        Subtracted from all times before the kernel sees them.
    log_marginal_likelihood : float
        Log marginal likelihood of the training data under the model.
    """

    structure: str
    kernel: Kernel
    mean: float
    noise_std: float
    times: np.ndarray
    values: np.ndarray
    time_offset: float = 0.0
    log_marginal_likelihood: float = float("nan")
    _factor: np.ndarray = field(default=None, repr=False)
    _alpha: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not self.noise_std > 0:
            raise InvalidInputError(f"noise_std must be > 0, got {self.noise_std}")
        if self.times.shape != self.values.shape or self.times.ndim != 1:
            raise InvalidInputError("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise InvalidInputError("training times must be strictly increasing")

        gram = self.kernel(self.inputs(self.times))
        gram[np.diag_indices_from(gram)] += self.noise_variance
        self._factor, _ = jitchol(gram)
        self._alpha = cho_solve(self._factor, self.values - self.mean)
        if math.isnan(self.log_marginal_likelihood):
            self.log_marginal_likelihood = _lml_from_factor(self._factor, self._alpha, self.values - self.mean)

    @property
    def noise_variance(self) -> float:
        return self.noise_std ** 2

    def inputs(self, times) -> np.ndarray:
        return (np.asarray(times, dtype=float) - self.time_offset).reshape(-1, 1)

    @property
    def theta(self) -> np.ndarray:
        """Log-parameterised hyperparameters, the noise variance last."""
        return np.append(self.kernel.theta, math.log(self.noise_variance))

    def hyperparameters(self) -> dict[str, float]:
        """Natural-unit values of the fitted hyperparameters, keyed by scikit-learn name."""
        values = {h.name: float(np.exp(t)) for h, t in zip(free_hyperparameters(self.kernel), self.kernel.theta)}
        values["noise_std"] = float(self.noise_std)
        return values

    def length_scales(self) -> list[float]:
        return [v for k, v in self.hyperparameters().items() if k.endswith("length_scale")]

    def prior_std(self, time: float = 0.0) -> float:
        """Predictive std far from all training data."""
        return math.sqrt(float(self.kernel.diag(self.inputs([time]))[0]) + self.noise_variance)


def _lml_from_factor(factor: np.ndarray, alpha: np.ndarray, y: np.ndarray) -> float:
    return float(-0.5 * y @ alpha - 0.5 * log_det(factor) - 0.5 * len(y) * math.log(2.0 * math.pi))


def log_marginal_likelihood(theta, kernel: Kernel, times, values, mean: float | None = None,
                            eval_gradient: bool = False):
    """
    Log marginal likelihood of data under a constant-mean GP.

    Parameters
    ----------
    theta : array-like
        ``kernel.theta`` (log hyperparameters) followed by the log noise variance.
    kernel : Kernel
        Kernel whose structure is used; its own parameters are ignored.
    times, values : array-like
        Training data; ``times`` already offset as the kernel expects.
    mean : float, optional
        Constant mean, defaults to the mean of ``values``.
    eval_gradient : bool, optional
        Also return the gradient with respect to ``theta``.

    Returns
    -------
    float or tuple[float, np.ndarray]

    Raises
    ------
    ConditioningError
        If the Gram matrix cannot be factorised.
    """
    theta = np.asarray(theta, dtype=float)
    values = np.asarray(values, dtype=float)
    y = values - (values.mean() if mean is None else mean)
    inputs = np.asarray(times, dtype=float).reshape(-1, 1)
    k = kernel.clone_with_theta(theta[:-1])
    noise = math.exp(theta[-1])

    if eval_gradient:
        gram, gram_gradient = k(inputs, eval_gradient=True)
    else:
        gram = k(inputs)
    gram[np.diag_indices_from(gram)] += noise
    factor, _ = jitchol(gram)
    alpha = cho_solve(factor, y)
    lml = _lml_from_factor(factor, alpha, y)
    if not eval_gradient:
        return lml

    inner = np.outer(alpha, alpha) - cho_solve(factor, np.eye(len(y)))
    gradient = 0.5 * np.einsum("ij,jik->k", inner, gram_gradient)
    gradient = np.append(gradient, 0.5 * noise * np.trace(inner))
    return lml, gradient


def _bounds(kernel: Kernel) -> np.ndarray:
    return np.vstack([kernel.bounds, np.log(NOISE_BOUNDS)])


def initial_thetas(structure: str, values: np.ndarray, restarts: int, rng: np.random.Generator) -> list[np.ndarray]:
    """
    Starting points of the optimiser: one per initial length scale in
    ``{2, 8, 26}`` weeks with signal std = data std and noise std = 0.1 data std,
    then ``restarts`` random log-normal perturbations of those.
    """
    std = max(float(np.std(values)), STD_FLOOR)
    starts = []
    for length_scale in INIT_LENGTH_SCALES:
        kernel = build_kernel(structure, length_scale, std ** 2)
        bounds = _bounds(kernel)
        theta = np.append(kernel.theta, math.log((0.1 * std) ** 2))
        starts.append(np.clip(theta, bounds[:, 0], bounds[:, 1]))
    fixed = list(starts)
    for r in range(restarts):
        base = fixed[r % len(fixed)]
        starts.append(np.clip(base + rng.normal(0.0, 1.0, size=base.shape), bounds[:, 0], bounds[:, 1]))
    return starts


def condition(kernel: Kernel, noise_std: float, times, values, structure: str = "",
              mean: float | None = None) -> GPModel:
    """
    GP with fixed hyperparameters conditioned on data.

    Times are offset by their mean, as in :func:`gp_fit`.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    return GPModel(structure, kernel, float(values.mean() if mean is None else mean), float(noise_std),
                   times, values, time_offset=float(times.mean()))


def gp_fit(times, values, kernel_structure: str = "RBF+PERIODIC", restarts: int = 5, seed: int = 0,
           warm_start: np.ndarray | None = None, maxiter: int = 200) -> GPModel:
    """
    Fit GP hyperparameters by maximising the log marginal likelihood.

    The constant mean is fixed to the training mean. Optimisation is L-BFGS-B
    on log hyperparameters with analytic gradients, started from every point of
    :func:`initial_thetas`.

    Parameters
    ----------
    times, values : array-like
        Training data, times in weeks and strictly increasing.
    kernel_structure : str, optional
        E.g. ``"RBF"`` or ``"RBF+PERIODIC"``.
    restarts : int, optional
        Random restarts on top of the three fixed initialisations.
    seed : int, optional
        Seed of the random restarts.
    warm_start : np.ndarray, optional
        Full theta (kernel then log noise variance) tried first, e.g. the fit of
        the previous issue date. When given, only the warm start and the random
        restarts around it are optimised.
    maxiter : int, optional
        Iteration cap of each optimisation.

    Returns
    -------
    GPModel
        The best model found.

    Raises
    ------
    InvalidInputError
        Fewer than 10 points, non-finite values or unordered times.
    GPFitError
        No restart converged; ``best_model`` holds the best model found, if any.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) < MIN_TRAINING_POINTS:
        raise InvalidInputError(f"GP fit needs at least {MIN_TRAINING_POINTS} points, got {len(times)}")
    if times.shape != values.shape or not np.all(np.isfinite(values)) or not np.all(np.isfinite(times)):
        raise InvalidInputError("GP training times and values must be finite and of equal length")
    if np.any(np.diff(times) <= 0):
        raise InvalidInputError("GP training times must be strictly increasing")

    structure = canonical_structure(kernel_structure)
    template = build_kernel(structure)
    bounds = _bounds(template)
    mean = float(values.mean())
    offset = float(times.mean())
    inputs = times - offset
    rng = np.random.default_rng(seed)

    if warm_start is not None:
        base = np.clip(np.asarray(warm_start, dtype=float), bounds[:, 0], bounds[:, 1])
        starts = [base] + [np.clip(base + rng.normal(0.0, 1.0, size=base.shape), bounds[:, 0], bounds[:, 1])
                           for _ in range(restarts)]
    else:
        starts = initial_thetas(structure, values, restarts, rng)

    def objective(theta):
        try:
            lml, gradient = log_marginal_likelihood(theta, template, inputs, values, mean, eval_gradient=True)
        except ConditioningError:
            return _PENALTY, np.zeros_like(theta)
        if not np.isfinite(lml) or not np.all(np.isfinite(gradient)):
            return _PENALTY, np.zeros_like(theta)
        return -lml, -gradient

    best_theta, best_lml, converged = None, -np.inf, False
    for theta0 in starts:
        result = optimize.minimize(objective, theta0, jac=True, method="L-BFGS-B", bounds=bounds,
                                   options={"maxiter": maxiter})
        lml = -float(result.fun)
        if result.fun >= _PENALTY or not np.isfinite(lml):
            continue
        converged = converged or bool(result.success)
        if lml > best_lml:
            best_theta, best_lml = result.x, lml

    if best_theta is None:
        raise GPFitError(f"no restart of the {structure} fit produced a finite log marginal likelihood")

    kernel = template.clone_with_theta(best_theta[:-1])
    model = GPModel(structure, kernel, mean, math.sqrt(math.exp(best_theta[-1])), times, values,
                    time_offset=offset)
    if not converged:
        raise GPFitError(f"{structure} fit did not converge from any of {len(starts)} starts", model)
    logger.debug("fitted %s on %d points: lml %.3f", structure, len(times), model.log_marginal_likelihood)
    return model


def predict_arrays(model: GPModel, query_times) -> tuple[np.ndarray, np.ndarray]:
    """
    Posterior mean of the latent function and predictive std (including noise).

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        Means and standard deviations at ``query_times``.
    """
    query = model.inputs(query_times)
    cross = model.kernel(query, model.inputs(model.times))
    mean = model.mean + cross @ model._alpha
    v = linalg.solve_triangular(model._factor, cross.T, lower=True, check_finite=False)
    variance = model.kernel.diag(query) - np.einsum("ij,ij->j", v, v)
    std = np.sqrt(np.maximum(variance, 0.0) + model.noise_variance)
    return mean, std


def gp_predict(model: GPModel, query_times) -> list[tuple[float, float]]:
    """
    Posterior ``(mean, std)`` at each query time.

    Query times may lie between or beyond the training times.
    """
    mean, std = predict_arrays(model, query_times)
    return [(float(m), float(s)) for m, s in zip(mean, std)]
