import numpy as np

from vegcast.core import WeeklySeries

from .config import GapFillConfig
from .smoothing import preprocess


class ForecastModeBuilder:
    """
    Builds the preprocessed series as it would have looked at each issue date.

    Interpolation and smoothing read neighbouring weeks, so the value of a week
    changes when later observations arrive. For local interpolators only the last
    ``cfg.dependency_horizon`` weeks before the issue date can differ from the
    full-history result; those are recomputed from a segment of the observations
    truncated at the issue date. Global interpolators recompute the whole prefix.

    Parameters
    ----------
    raw : WeeklySeries
        Composited series before gap-filling.
    cfg : GapFillConfig
        The preprocessing configuration.
    """

    def __init__(self, raw: WeeklySeries, cfg: GapFillConfig):
        self.raw = raw
        self.cfg = cfg
        self.full = preprocess(raw, cfg)

    def tail(self, issue_index: int) -> tuple[int, np.ndarray]:
        """
        The slots of the issue-date view that may differ from the full-history series.

        Returns
        -------
        tuple[int, np.ndarray]
            First slot of the tail and its values; slots before it equal ``self.full``.
        """
        if not self.cfg.interpolator.is_local:
            return 0, preprocess(self.raw.truncated_at(issue_index), self.cfg).values

        horizon = self.cfg.dependency_horizon
        tail_start = max(0, issue_index - horizon + 1)
        segment_start = max(0, issue_index - 3 * horizon)
        segment = preprocess(self.raw.slice(segment_start, issue_index + 1), self.cfg)
        return tail_start, segment.values[tail_start - segment_start:]

    def at(self, issue_index: int) -> WeeklySeries:
        """The preprocessed series using only observations up to slot ``issue_index``."""
        tail_start, tail = self.tail(issue_index)
        values = np.concatenate([self.full.values[:tail_start], tail])
        return WeeklySeries(self.raw.grid.sub_grid(0, issue_index + 1), values)
