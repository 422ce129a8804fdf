# contains the methods that fill a single run of missing weeks.

import logging
from abc import ABC, abstractmethod

import numpy as np
from scipy.interpolate import CubicSpline

from .config import GapFillConfig, Interpolator

logger = logging.getLogger(__name__)


class NoSupportError(Exception):
    """Raised by an interpolator when a gap run lacks the support points it needs."""


def register_interpolator(method: Interpolator | list[Interpolator]):
    """
    Decorator to automatically register an interpolator class.
    """
    def decorator(cls):
        instance = cls()
        if isinstance(method, Interpolator):
            BaseInterpolator.register_interpolator(method, instance)
        elif isinstance(method, list):
            for m in method:
                BaseInterpolator.register_interpolator(m, instance)
        else:
            raise ValueError("Invalid method type. Expected Interpolator or list[Interpolator].")
        return cls
    return decorator


class BaseInterpolator(ABC):

    _interpolators: dict[Interpolator, "BaseInterpolator"] = {}

    @staticmethod
    def register_interpolator(method: Interpolator, interpolator: "BaseInterpolator"):
        """
        Register an interpolator.

        Parameters
        ----------
        method : Interpolator
            The method the interpolator implements.
        interpolator : BaseInterpolator
            The interpolator to register.
        """
        BaseInterpolator._interpolators[method] = interpolator

    @staticmethod
    def get_interpolator(method: Interpolator) -> "BaseInterpolator":
        """
        Get an interpolator by method.

        Raises
        ------
        ValueError
            If no interpolator is registered for the method.
        """
        if method not in BaseInterpolator._interpolators:
            available = ", ".join(str(m) for m in BaseInterpolator._interpolators)
            raise ValueError(f"Interpolator {method} not found. Available interpolators: {available}")
        return BaseInterpolator._interpolators[method]

    @staticmethod
    def has_interpolator(method: Interpolator) -> bool:
        return method in BaseInterpolator._interpolators

    def prepare(self, values: np.ndarray, cfg: GapFillConfig):
        """
        Compute whatever the interpolator needs from the whole series once.

        Parameters
        ----------
        values : np.ndarray
            Slot values with NaN gaps.
        cfg : GapFillConfig
            The configuration.

        Returns
        -------
        object
            State handed to every ``fill_run`` call for this series.
        """
        return None

    @abstractmethod
    def fill_run(self, values: np.ndarray, start: int, stop: int, cfg: GapFillConfig, state) -> np.ndarray:
        """
        Values for the missing slots ``start .. stop - 1``.

        ``values[start - 1]`` and ``values[stop]`` are always present.

        Raises
        ------
        NoSupportError
            If the run cannot be filled.
        """
        pass


def support_points(values: np.ndarray, start: int, stop: int, per_side: int,
                   reach: int) -> tuple[np.ndarray, np.ndarray]:
    """
    The ``per_side`` nearest present slots on each side of a gap run, looking at
    most ``reach`` slots beyond the run edges.

    Returns
    -------
    tuple[np.ndarray, np.ndarray]
        Slot positions and values, in increasing slot order.
    """
    left = [k for k in range(start - 1, max(-1, start - 1 - reach), -1) if not np.isnan(values[k])][:per_side]
    right = [k for k in range(stop, min(len(values), stop + reach)) if not np.isnan(values[k])][:per_side]
    slots = np.array(sorted(left) + right, dtype=int)
    return slots, values[slots]


def _linear(values: np.ndarray, start: int, stop: int) -> np.ndarray:
    missing = np.arange(start, stop)
    return np.interp(missing, [start - 1, stop], [values[start - 1], values[stop]])


@register_interpolator(Interpolator.LINEAR)
class LinearInterpolator(BaseInterpolator):
    """Straight line between the present neighbours of the run."""

    def fill_run(self, values, start, stop, cfg, state):
        return _linear(values, start, stop)


@register_interpolator(Interpolator.QUADRATIC)
class QuadraticInterpolator(BaseInterpolator):
    """
    One least-squares quadratic per gap run, fit to the two nearest present slots
    on each side. With only three support points the run is filled linearly.
    """

    def fill_run(self, values, start, stop, cfg, state):
        slots, support = support_points(values, start, stop, per_side=2, reach=cfg.l_max)
        if len(slots) < 4:
            return _linear(values, start, stop)
        # centre the abscissa on the run for conditioning
        centre = 0.5 * (start + stop - 1)
        coefficients = np.polynomial.polynomial.polyfit(slots - centre, support, 2)
        return np.polynomial.polynomial.polyval(np.arange(start, stop) - centre, coefficients)


@register_interpolator(Interpolator.CUBIC)
class CubicInterpolator(BaseInterpolator):
    """Cubic through the two nearest present slots on each side of the run."""

    def fill_run(self, values, start, stop, cfg, state):
        slots, support = support_points(values, start, stop, per_side=2, reach=cfg.l_max)
        if len(slots) < 4:
            return _linear(values, start, stop)
        return CubicSpline(slots.astype(float), support)(np.arange(start, stop, dtype=float))


@register_interpolator(Interpolator.LAST_VALUE)
class LastValueInterpolator(BaseInterpolator):

    def fill_run(self, values, start, stop, cfg, state):
        return np.full(stop - start, values[start - 1])


@register_interpolator(Interpolator.MEAN_VALUE)
class MeanValueInterpolator(BaseInterpolator):
    """Every gap gets the mean of the series' present values."""

    def prepare(self, values, cfg):
        present = values[~np.isnan(values)]
        return float(present.mean()) if present.size else None

    def fill_run(self, values, start, stop, cfg, state):
        if state is None:
            raise NoSupportError("series has no present values")
        return np.full(stop - start, state)


# the GP needs enough points to identify its hyperparameters
GP_MIN_POINTS = 10


@register_interpolator(Interpolator.GP)
class GPInterpolator(BaseInterpolator):
    """Posterior mean of a GP fit once to all present values of the series."""

    def prepare(self, values, cfg):
        from vegcast.gp import gp_fit, GPFitError

        present = ~np.isnan(values)
        if present.sum() < GP_MIN_POINTS:
            return None
        times = np.flatnonzero(present).astype(float)
        try:
            return gp_fit(times, values[present], kernel_structure=cfg.gp_kernel,
                          restarts=cfg.gp_restarts, seed=cfg.seed)
        except GPFitError as e:
            logger.warning("GP interpolator fit failed, using best restart: %s", e)
            return e.best_model

    def fill_run(self, values, start, stop, cfg, state):
        from vegcast.gp import predict_arrays

        if state is None:
            raise NoSupportError(f"fewer than {GP_MIN_POINTS} present values for a GP fit")
        mean, _ = predict_arrays(state, np.arange(start, stop, dtype=float))
        return mean
