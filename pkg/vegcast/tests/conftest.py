from datetime import date

import numpy as np
import pytest

from vegcast.config import PipelineConfig
from vegcast.core import ForecastRecord, IndexKind, Method, ObservationSeries, Quality, Sample, TimeGrid, WeeklySeries
from vegcast.synth import SyntheticSpec, generate_synthetic

START = date(2001, 1, 6)  # a Saturday


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run the slow statistical checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: expensive statistical acceptance check (needs --runslow)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow, use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def grid():
    return TimeGrid(START, 52 * 4)


def seasonal_series(grid: TimeGrid, rng=None, noise: float = 0.0, base: float = 0.45, amplitude: float = 0.2):
    """NDVI-like series with a 52-week cycle."""
    values = base + amplitude * np.sin(2 * np.pi * grid.times() / 52.0)
    if rng is not None and noise:
        values = values + rng.normal(0.0, noise, grid.length)
    return WeeklySeries(grid, values)


def pixel(pixel_id: str, region_id: str, dates, values, bad=()):
    samples = [Sample(d, float(v), Quality.BAD if d in bad else Quality.GOOD) for d, v in zip(dates, values)]
    return ObservationSeries(pixel_id, region_id, tuple(samples))


def make_records(truth, predicted, lead: int = 4, method: Method = Method.AR, kind: IndexKind = IndexKind.VCI3M,
                 region_id: str = "R01", truth_at_issue=None, clear_fraction=None):
    grid = TimeGrid(START, len(truth))
    records = []
    for i, (t, p) in enumerate(zip(truth, predicted)):
        records.append(ForecastRecord(region_id, grid.slot_date(i), lead, float(p), float(t), method, kind,
                                      truth_at_issue=None if truth_at_issue is None else float(truth_at_issue[i]),
                                      clear_fraction=None if clear_fraction is None else float(clear_fraction[i])))
    return records


SMALL_SPEC = dict(regions=2, years=4, pixels_per_region=6, gap_probability=0.03, pixel_gap_probability=0.03,
                  min_pixels_for_aggregate=3, train_length=60, lead=4)


@pytest.fixture(scope="session")
def small_bundle(tmp_path_factory):
    """Two regions, four years, six pixels each."""
    return generate_synthetic(SyntheticSpec(**SMALL_SPEC), seed=7, output_dir=str(tmp_path_factory.mktemp("bench")))


def small_config(bundle, tmp_path, **overrides) -> PipelineConfig:
    values = dict(input_path=bundle.observations_dir, output_dir=str(tmp_path / "out"),
                  cache_dir=str(tmp_path / "cache"), min_pixels_for_aggregate=3, train_length=60, burn_in=112,
                  issue_stride=10, leads=[1, 4], methods=["AR", "PERSISTENCE"], index_kinds=["VCI3M", "NDVI_ANOMALY"],
                  granger_lead=4, granger_min_coverage=0.0, extra_drought_thresholds=[20.0])
    values.update(overrides)
    return PipelineConfig(**values)


@pytest.fixture
def small_cfg(small_bundle, tmp_path):
    return small_config(small_bundle, tmp_path)
