from datetime import date

import numpy as np
import pytest

from vegcast.core import (DegenerateWeekError, IndexKind, InsufficientClimatologyError, InvalidInputError, TimeGrid,
                          WeeklySeries)
from vegcast.indices import (build_climatology, compute_ndvi_anomaly, compute_vci, compute_vci3m, read_climatology,
                             vci3m_values, write_climatology)

from .conftest import START, seasonal_series


def test_climatology_per_week_of_year(grid, rng):
    series = seasonal_series(grid, rng, noise=0.03)
    clim = build_climatology(series)
    weeks = grid.weeks_of_year()
    for week in (1, 20, 52):
        values = series.values[weeks == week]
        assert clim.ndvi_min[week - 1] == values.min()
        assert clim.ndvi_max[week - 1] == values.max()
        assert clim.ndvi_mean[week - 1] == pytest.approx(values.mean())
        assert clim.counts[week - 1] == len(values)


def test_week_53_counts_as_week_52():
    grid = TimeGrid(date(2004, 12, 25), 3)
    assert list(grid.weeks_of_year()) == [52, 52, 1]


def test_climatology_needs_two_values_per_week():
    grid = TimeGrid(START, 60)
    with pytest.raises(InsufficientClimatologyError) as info:
        build_climatology(WeeklySeries(grid, np.full(60, 0.4)))
    assert info.value.week == 9
    assert info.value.count == 1


def test_gaps_are_left_out_of_the_climatology(grid, rng):
    series = seasonal_series(grid, rng, noise=0.03)
    values = series.values.copy()
    weeks = grid.weeks_of_year()
    first = np.flatnonzero(weeks == 10)[0]
    values[first] = np.nan
    clim = build_climatology(series.with_values(values))
    assert clim.counts[9] == (weeks == 10).sum() - 1


def test_vci_spans_the_climatological_range(grid, rng):
    series = seasonal_series(grid, rng, noise=0.03)
    vci = compute_vci(series, build_climatology(series), "R")
    assert vci.kind is IndexKind.VCI
    assert np.nanmin(vci.values) == 0.0
    assert np.nanmax(vci.values) == 100.0
    weeks = grid.weeks_of_year()
    # every week holds exactly one 0 and one 100
    for week in (3, 30):
        assert sorted(vci.values[weeks == week])[0] == 0.0
        assert sorted(vci.values[weeks == week])[-1] == 100.0


def test_vci_is_invariant_under_positive_affine_maps(grid, rng):
    series = seasonal_series(grid, rng, noise=0.03)
    scaled = series.with_values(0.5 * series.values - 0.1)
    a = compute_vci(series, build_climatology(series))
    b = compute_vci(scaled, build_climatology(scaled))
    np.testing.assert_allclose(a.values, b.values, atol=1e-9)


def test_vci_outside_the_reference_range_is_clipped(grid, rng):
    reference = seasonal_series(grid, rng, noise=0.03)
    clim = build_climatology(reference)
    wetter = reference.with_values(reference.values + 0.5)
    vci = compute_vci(wetter, clim)
    np.testing.assert_array_equal(vci.values, np.full(grid.length, 100.0))


def test_degenerate_week(grid, rng):
    series = seasonal_series(grid, rng, noise=0.03)
    values = series.values.copy()
    weeks = grid.weeks_of_year()
    values[weeks == 7] = 0.33
    flat = series.with_values(values)
    clim = build_climatology(flat)
    assert clim.degenerate_weeks() == [7]
    with pytest.raises(DegenerateWeekError) as info:
        compute_vci(flat, clim)
    assert info.value.weeks == [7]
    vci = compute_vci(flat, clim, degenerate_policy="midpoint")
    assert (vci.values[weeks == 7] == 50.0).all()


def test_vci_gaps_propagate(grid, rng):
    series = seasonal_series(grid, rng, noise=0.03)
    clim = build_climatology(series)
    values = series.values.copy()
    values[[4, 90]] = np.nan
    vci = compute_vci(series.with_values(values), clim)
    assert np.isnan(vci.values[[4, 90]]).all()
    assert vci.series.present_count == grid.length - 2


def test_vci3m_is_a_trailing_twelve_week_mean():
    vci = np.arange(20, dtype=float)
    present = np.ones(20, dtype=bool)
    values = vci3m_values(vci, present)
    assert values[0] == 0.0
    assert values[11] == pytest.approx(np.mean(np.arange(12)))
    assert values[19] == pytest.approx(np.mean(np.arange(8, 20)))


def test_vci3m_gaps():
    vci = np.full(20, 40.0)
    vci[15] = np.nan
    vci[16] = 10.0
    present = ~np.isnan(vci)
    values = vci3m_values(vci, present)
    assert np.isnan(values[15])
    # the gap is skipped inside the window
    assert values[16] == pytest.approx((40.0 * 10 + 10.0) / 11)


def test_compute_vci3m_checks_inputs(grid, rng):
    series = seasonal_series(grid, rng, noise=0.03)
    clim = build_climatology(series)
    vci = compute_vci(series, clim, "R")
    vci3m = compute_vci3m(vci, series)
    assert vci3m.kind is IndexKind.VCI3M
    assert vci3m.region_id == "R"
    assert vci3m.values.min() >= 0.0 and vci3m.values.max() <= 100.0
    with pytest.raises(InvalidInputError):
        compute_vci3m(vci3m, series)
    with pytest.raises(InvalidInputError):
        compute_vci3m(vci, series.slice(0, 100))


def test_ndvi_anomaly_has_zero_weekly_mean(grid, rng):
    series = seasonal_series(grid, rng, noise=0.03)
    anomaly = compute_ndvi_anomaly(series, build_climatology(series), "R")
    weeks = grid.weeks_of_year()
    for week in range(1, 53):
        assert anomaly.values[weeks == week].mean() == pytest.approx(0.0, abs=1e-12)


def test_climatology_file(tmp_path, grid, rng):
    clim = build_climatology(seasonal_series(grid, rng, noise=0.03))
    path = str(tmp_path / "clim.csv")
    write_climatology(clim, path)
    restored = read_climatology(path)
    np.testing.assert_array_equal(restored.ndvi_min, clim.ndvi_min)
    np.testing.assert_array_equal(restored.ndvi_max, clim.ndvi_max)
    np.testing.assert_array_equal(restored.ndvi_mean, clim.ndvi_mean)
