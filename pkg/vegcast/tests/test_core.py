from datetime import date, timedelta

import numpy as np
import pytest

from vegcast.core import (DroughtCategory, ForecastRecord, IndexKind, IndexSeries, InvalidInputError, InvalidValueError,
                          Method, NoForecast, ObservationSeries, OutOfRangeError, Quality, ReasonCode, Sample, TimeGrid,
                          WeeklySeries, align_to_grid, categorize, is_boundary_value, week_of_year)

from .conftest import START, pixel


def test_grid_slots_share_weekday(grid):
    dates = grid.dates()
    assert len(dates) == grid.length
    assert {d.weekday() for d in dates} == {START.weekday()}
    assert all((b - a).days == 7 for a, b in zip(dates, dates[1:]))


def test_slot_of_window_is_previous_six_days(grid):
    slot = grid.slot_date(3)
    assert grid.slot_of(slot) == 3
    assert grid.slot_of(slot - timedelta(days=6)) == 3
    assert grid.slot_of(slot - timedelta(days=7)) == 2
    assert grid.slot_of(slot + timedelta(days=1)) == 4
    assert grid.slot_of(grid.window_start - timedelta(days=1)) is None
    assert grid.slot_of(grid.end_date + timedelta(days=1)) is None


def test_index_of_rejects_non_slot_dates(grid):
    assert grid.index_of(grid.slot_date(10)) == 10
    with pytest.raises(InvalidInputError):
        grid.index_of(grid.slot_date(10) + timedelta(days=2))


def test_covering_grid_contains_both_ends():
    first, last = date(2003, 3, 2), date(2003, 5, 17)
    grid = TimeGrid.covering(first, last)
    assert grid.slot_of(first) is not None
    assert grid.slot_of(last) is not None
    assert grid.anchor_weekday == 5


def test_week_53_folds_into_52():
    assert week_of_year(date(2004, 12, 31)) == 52  # ISO week 53 of 2004
    assert week_of_year(date(2004, 1, 7)) == 2


def test_invalid_grid():
    with pytest.raises(InvalidInputError):
        TimeGrid(START, 0)


def test_weekly_series_is_immutable(grid):
    series = WeeklySeries(grid, np.zeros(grid.length))
    with pytest.raises(ValueError):
        series.values[0] = 1.0
    with pytest.raises(AttributeError):
        series.grid = grid


def test_weekly_series_rejects_wrong_length_and_inf(grid):
    with pytest.raises(InvalidInputError):
        WeeklySeries(grid, np.zeros(grid.length - 1))
    values = np.zeros(grid.length)
    values[5] = np.inf
    with pytest.raises(InvalidValueError):
        WeeklySeries(grid, values)


def test_gap_and_present_runs():
    grid = TimeGrid(START, 10)
    series = WeeklySeries(grid, [np.nan, 1, 2, np.nan, np.nan, 3, 4, 5, np.nan, np.nan])
    assert series.gap_runs() == [(0, 1), (3, 5), (8, 10)]
    assert series.present_runs() == [(1, 3), (5, 8)]
    assert series.present_count == 5
    assert series.value_at(3) is None
    assert series.value_at(5) == 3.0


def test_truncated_at_keeps_prefix(grid):
    series = WeeklySeries(grid, np.arange(grid.length, dtype=float))
    head = series.truncated_at(9)
    assert len(head) == 10
    assert head.grid.start_date == grid.start_date
    np.testing.assert_array_equal(head.values, np.arange(10.0))


def test_empty_series():
    series = WeeklySeries.empty(TimeGrid(START, 4))
    assert series.is_empty
    assert series.gap_runs() == [(0, 4)]


def test_index_series_range_checks(grid):
    with pytest.raises(InvalidValueError):
        IndexSeries(WeeklySeries(grid, np.full(grid.length, 101.0)), IndexKind.VCI3M, "R")
    with pytest.raises(InvalidValueError):
        IndexSeries(WeeklySeries(grid, np.full(grid.length, 1.5)), IndexKind.NDVI, "R")
    # anomalies are unbounded
    IndexSeries(WeeklySeries(grid, np.full(grid.length, 3.0)), IndexKind.NDVI_ANOMALY, "R")


@pytest.mark.parametrize("value, expected", [
    (80.0, DroughtCategory.WET),
    (50.0, DroughtCategory.NORMAL),
    (35.0, DroughtCategory.MODERATE),
    (34.99, DroughtCategory.MODERATE),
    (20.0, DroughtCategory.SEVERE),
    (10.0, DroughtCategory.EXTREME),
    (0.0, DroughtCategory.EXTREME),
])
def test_categorize(value, expected):
    assert categorize(value) is expected


def test_boundary_values_go_to_the_drier_class():
    for boundary in (50.0, 35.0, 20.0, 10.0):
        assert is_boundary_value(boundary)
        assert categorize(boundary) is not categorize(boundary + 1e-6)
    assert not is_boundary_value(34.0)
    assert categorize(35.0).is_drought
    assert not categorize(35.0 + 1e-9).is_drought


def test_categorize_rejects_nan():
    with pytest.raises(InvalidValueError):
        categorize(float("nan"))


def test_align_to_grid_drops_bad_samples():
    grid = TimeGrid(START, 4)
    dates = [START - timedelta(days=6), START, START + timedelta(days=3), START + timedelta(days=14)]
    obs = pixel("p", "R", dates, [0.1, 0.2, 0.3, 0.4], bad={START + timedelta(days=3)})
    assert align_to_grid(obs, grid) == [(0, 0.1), (0, 0.2), (2, 0.4)]


def test_align_to_grid_reports_out_of_range_dates():
    grid = TimeGrid(START, 2)
    late = START + timedelta(days=30)
    obs = pixel("p", "R", [START, late], [0.2, 0.3], bad={late})
    with pytest.raises(OutOfRangeError) as info:
        align_to_grid(obs, grid)
    assert info.value.dates == [late]


def test_observation_series_validates_order_and_range():
    with pytest.raises(InvalidInputError):
        ObservationSeries("p", "R", (Sample(START, 0.2), Sample(START, 0.3)))
    with pytest.raises(InvalidValueError):
        ObservationSeries("p", "R", (Sample(START, 1.2),))
    # bad samples may carry garbage
    ObservationSeries("p", "R", (Sample(START, 9.0, Quality.BAD),))


def test_forecast_record():
    record = ForecastRecord("R", START, 4, 30.0, 40.0, Method.AR)
    assert record.target_date == START + timedelta(weeks=4)
    assert record.error == 10.0
    assert record.key == ("R", START, 4)
    with pytest.raises(InvalidValueError):
        ForecastRecord("R", START, 0, 30.0, 40.0, Method.AR)
    with pytest.raises(InvalidValueError):
        ForecastRecord("R", START, 1, float("nan"), 40.0, Method.AR)


def test_no_forecast_text():
    assert str(NoForecast(ReasonCode.GAP, "slot 4")) == "no-forecast(GAP: slot 4)"
    assert Method.from_string("persistence") is Method.PERSISTENCE
    assert IndexKind.from_string("ndvi-anomaly") is IndexKind.NDVI_ANOMALY
