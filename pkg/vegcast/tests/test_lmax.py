import numpy as np

from vegcast.ar import ARConfig
from vegcast.gapfill import GapFillConfig, Interpolator
from vegcast.ingest import build_region_sets, grid_for, load_observations
from vegcast.pipeline import lmax_tradeoff


def test_longer_fills_never_lower_coverage(small_bundle):
    observations = load_observations(small_bundle.observations_dir)
    sets = build_region_sets(observations, grid_for(observations), 3)
    table = lmax_tradeoff(sets, candidates=(1, 3, 6), lead=4, ar_cfg=ARConfig(order=3, train_length=60, lead=4),
                          gapfill=GapFillConfig(interpolator=Interpolator.LINEAR), first_issue=112, stride=8)
    assert list(table.columns) == ["l_max", "regions", "median_r2_score", "median_pct_weeks_forecastable"]
    assert list(table["l_max"]) == [1, 3, 6]
    assert (table["regions"] == 2).all()
    coverage = table["median_pct_weeks_forecastable"].to_numpy()
    assert (np.diff(coverage) >= 0).all()
    assert not np.isnan(table["median_r2_score"]).all()
