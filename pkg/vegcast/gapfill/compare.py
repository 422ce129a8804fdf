import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from vegcast.core import InvalidInputError, ReasonCode, WeeklySeries
from vegcast.utils import log_event

from .config import GapFillConfig, Interpolator
from .smoothing import fill_gaps

logger = logging.getLogger(__name__)

DEFAULT_METHODS = (Interpolator.GP, Interpolator.LINEAR, Interpolator.QUADRATIC, Interpolator.CUBIC,
                   Interpolator.LAST_VALUE, Interpolator.MEAN_VALUE)


@dataclass(frozen=True)
class InterpolatorScore:
    """
    Hold-out skill of one interpolator.

    Attributes
    ----------
    method : Interpolator
        The interpolator.
    r2 : float
        R²-score of filled against held-out values pooled over all series; NaN when degenerate.
    filled : int
        Held-out values the method managed to fill.
    held_out : int
        Values removed in total.
    degenerate : bool
        True when the held-out values have zero variance, leaving R² undefined.
    """

    method: Interpolator
    r2: float
    filled: int
    held_out: int
    degenerate: bool = False


def _choose_holdouts(series: WeeklySeries, drop_count: int, rng: np.random.Generator) -> np.ndarray:
    present = series.present_mask
    if drop_count > series.present_count:
        raise InvalidInputError(f"cannot drop {drop_count} values from a series with "
                                f"{series.present_count} present values")
    # interior present slots whose neighbours are present become single-week gaps
    candidates = [i for i in range(1, len(series) - 1) if present[i - 1] and present[i] and present[i + 1]]
    chosen = set()
    for i in rng.permutation(candidates):
        if len(chosen) == drop_count:
            break
        if i - 1 in chosen or i + 1 in chosen:
            continue
        chosen.add(int(i))
    if len(chosen) < drop_count:
        raise InvalidInputError(f"series starting {series.grid.start_date} has room for only "
                                f"{len(chosen)} non-adjacent hold-outs, {drop_count} requested")
    return np.array(sorted(chosen), dtype=int)


def compare_interpolators(series_set: list[WeeklySeries], drop_count: int, seed: int,
                          methods=DEFAULT_METHODS, cfg: GapFillConfig | None = None) -> list[InterpolatorScore]:
    """
    Score interpolators by removing present values and filling them back in.

    Parameters
    ----------
    series_set : list[WeeklySeries]
        The series to test on.
    drop_count : int
        Values removed from each series; no two removed values are adjacent.
    seed : int
        Seed of the hold-out selection.
    methods : iterable of Interpolator, optional
        Candidates, scored in the given order.
    cfg : GapFillConfig, optional
        Base configuration; its interpolator is replaced by each candidate.

    Returns
    -------
    list[InterpolatorScore]
        One score per method.

    Raises
    ------
    InvalidInputError
        If a series has fewer present values than ``drop_count + 3`` or too little
        room for non-adjacent hold-outs.
    """
    cfg = cfg or GapFillConfig()
    rng = np.random.default_rng(seed)

    holdouts = []
    for series in series_set:
        if drop_count > series.present_count:
            raise InvalidInputError(f"drop_count {drop_count} exceeds the {series.present_count} present values")
        if series.present_count < drop_count + 3:
            raise InvalidInputError(f"series needs at least {drop_count + 3} present values, "
                                    f"has {series.present_count}")
        dropped = _choose_holdouts(series, drop_count, rng)
        values = series.values.copy()
        values[dropped] = np.nan
        holdouts.append((series.with_values(values), dropped, series.values[dropped]))

    scores = []
    for method in methods:
        method = Interpolator.from_string(method) if isinstance(method, str) else method
        method_cfg = cfg.with_interpolator(method)
        truths, predictions = [], []
        for thinned, dropped, truth in holdouts:
            filled = fill_gaps(thinned, method_cfg).values[dropped]
            ok = ~np.isnan(filled)
            truths.append(truth[ok])
            predictions.append(filled[ok])
        truth = np.concatenate(truths) if truths else np.array([])
        prediction = np.concatenate(predictions) if predictions else np.array([])

        total = float(((truth - truth.mean()) ** 2).sum()) if truth.size else 0.0
        if total == 0.0:
            log_event(logger, "compare", None, ReasonCode.DEGENERATE_METRIC, method=method.value)
            scores.append(InterpolatorScore(method, float("nan"), int(truth.size),
                                            drop_count * len(series_set), degenerate=True))
            continue
        r2 = 1.0 - float(((truth - prediction) ** 2).sum()) / total
        scores.append(InterpolatorScore(method, r2, int(truth.size), drop_count * len(series_set)))
        logger.info("interpolator %s: R2 %.4f over %d hold-outs", method, r2, truth.size)
    return scores


def scores_frame(scores: list[InterpolatorScore]) -> pd.DataFrame:
    return pd.DataFrame({
        "method": [s.method.value for s in scores],
        "r2_score": [s.r2 for s in scores],
        "filled": [s.filled for s in scores],
        "held_out": [s.held_out for s in scores],
        "degenerate": [s.degenerate for s in scores],
    })
