import json
import os

import numpy as np
import pytest

from vegcast.ar import ARConfig, granger_matrix
from vegcast.core import ConfigError, IndexKind, IndexSeries
from vegcast.evaluate import coverage_report
from vegcast.gapfill import GapFillConfig, Interpolator, fill_gaps
from vegcast.indices import build_climatology, compute_vci, compute_vci3m
from vegcast.ingest import aggregate_region, build_region_sets, grid_for, load_observations, read_regional_series
from vegcast.synth import (CLEAR_COUNTS_FILE, SIDECAR_FILE, TRUTH_FILE, Coupling, SyntheticSpec, expected_coverage,
                           generate_synthetic)

from .conftest import SMALL_SPEC


def file_bytes(directory):
    files = {}
    for root, _, names in os.walk(directory):
        for name in names:
            with open(os.path.join(root, name), "rb") as f:
                files[os.path.relpath(os.path.join(root, name), directory)] = f.read()
    return files


def test_same_seed_same_bytes(tmp_path):
    spec = SyntheticSpec(**SMALL_SPEC)
    generate_synthetic(spec, 3, str(tmp_path / "a"))
    generate_synthetic(spec, 3, str(tmp_path / "b"))
    a, b = file_bytes(tmp_path / "a"), file_bytes(tmp_path / "b")
    assert set(a) == {TRUTH_FILE, CLEAR_COUNTS_FILE, SIDECAR_FILE, "observations/R01.csv", "observations/R02.csv"}
    assert a == b

    generate_synthetic(spec, 4, str(tmp_path / "c"))
    assert file_bytes(tmp_path / "c")[TRUTH_FILE] != a[TRUTH_FILE]


@pytest.mark.parametrize("kwargs", [
    dict(regions=0),
    dict(persistence=1.0),
    dict(gap_probability=1.5),
    dict(noise_std=-0.1),
    dict(years=3, drought_events=2),
    dict(drought_events=1, drought_weeks=60),
    dict(regions=2, couplings=(Coupling("R01", "R03", 0.5),)),
    dict(regions=2, couplings=(Coupling("R01", "R01", 0.5),)),
    dict(regions=2, couplings=(Coupling("R01", "R02", 0.5, lag=0),)),
])
def test_invalid_specs(kwargs):
    with pytest.raises(ConfigError):
        SyntheticSpec(**kwargs)


def test_bundle_contents(small_bundle):
    assert sorted(small_bundle.truth) == ["R01", "R02"]
    assert small_bundle.grid.length == 4 * 52
    truth = read_regional_series(os.path.join(small_bundle.output_dir, TRUTH_FILE))
    for region_id, series in small_bundle.truth.items():
        assert series.present_count == series.grid.length
        np.testing.assert_allclose(truth[region_id].values, series.values)
        counts = small_bundle.clear_counts[region_id]
        assert counts.min() >= 0 and counts.max() <= SMALL_SPEC["pixels_per_region"]

    with open(os.path.join(small_bundle.output_dir, SIDECAR_FILE), encoding="utf-8") as f:
        sidecar = json.load(f)
    assert sidecar["seed"] == 7
    assert sidecar["spec"]["regions"] == 2
    assert sidecar["expected_coverage"] == pytest.approx(small_bundle.expected_coverage)


def test_observations_composite_onto_the_truth_grid(small_bundle):
    observations = load_observations(small_bundle.observations_dir)
    grid = grid_for(observations)
    assert grid == small_bundle.grid
    sets = build_region_sets(observations, grid, 1)
    for region_id, sample_set in sets.items():
        np.testing.assert_array_equal(sample_set.matrix().shape[0] - np.isnan(sample_set.matrix()).sum(axis=0),
                                      small_bundle.clear_counts[region_id])
        regional = aggregate_region(sample_set).values
        present = ~np.isnan(regional)
        # zero-mean pixel offsets keep the aggregate near the truth
        assert np.abs(regional[present] - small_bundle.truth[region_id].values[present]).max() < 0.1


def test_expected_coverage_matches_the_forecaster(small_bundle):
    spec = SyntheticSpec(**SMALL_SPEC)
    observations = load_observations(small_bundle.observations_dir)
    sets = build_region_sets(observations, grid_for(observations), spec.min_pixels_for_aggregate)
    gapfill = GapFillConfig(l_max=spec.l_max, interpolator=Interpolator.LINEAR)
    cfg = ARConfig(order=spec.order, train_length=spec.train_length, lead=spec.lead)
    filled = {r: fill_gaps(aggregate_region(s), gapfill) for r, s in sets.items()}
    table = coverage_report(filled, cfg, first_issue=spec.train_length - 1)
    for row in table.to_dict("records"):
        assert row["pct_weeks_forecastable"] == pytest.approx(small_bundle.expected_coverage[row["region_id"]])


def test_no_gaps_means_full_coverage():
    spec = SyntheticSpec(**SMALL_SPEC)
    assert expected_coverage(np.full(spec.weeks, spec.pixels_per_region), spec) == 100.0
    assert expected_coverage(np.zeros(spec.weeks, dtype=int), spec) == 0.0


def test_drought_events_depress_vci3m(tmp_path):
    spec = SyntheticSpec(regions=1, years=6, pixels_per_region=2, drought_events=1, drought_weeks=20)
    bundle = generate_synthetic(spec, 11, str(tmp_path))
    (event,) = bundle.events
    assert event.region_id == "R01"
    assert event.start >= spec.grid.slot_date(104)

    ndvi = bundle.truth["R01"]
    vci = compute_vci(ndvi, build_climatology(ndvi), "R01")
    vci3m = compute_vci3m(vci, ndvi)
    assert vci3m.values[bundle.grid.index_of(event.end)] < 35.0


def test_coupling_is_found_by_the_granger_matrix(tmp_path):
    spec = SyntheticSpec(regions=3, years=8, pixels_per_region=2, gap_probability=0.0, pixel_gap_probability=0.0,
                         couplings=(Coupling("R01", "R02", 0.6, lag=4),))
    bundle = generate_synthetic(spec, 5, str(tmp_path))
    seasonal = spec.base_ndvi + spec.seasonal_amplitude * np.sin(
        2 * np.pi * (bundle.grid.weeks_of_year() - 1) / 52.0)
    series = [IndexSeries(s.with_values(s.values - seasonal), IndexKind.NDVI_ANOMALY, r)
              for r, s in sorted(bundle.truth.items())]
    matrix = granger_matrix(series, ARConfig(order=3, train_length=150, lead=4), threshold_pct=5.0,
                            window_stride=10)
    assert matrix.pairs() == {("R01", "R02")}
