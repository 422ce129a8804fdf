import numpy as np
import pytest

from vegcast.core import InvalidInputError, InvalidValueError, TimeGrid, WeeklySeries
from vegcast.gapfill import (BaseInterpolator, FillWarning, ForecastModeBuilder, GapFillConfig, Interpolator,
                             compare_interpolators, fill_gaps, preprocess, savitzky_golay, scores_frame)

from .conftest import START, seasonal_series


def series_of(values):
    return WeeklySeries(TimeGrid(START, len(values)), values)


def test_every_interpolator_is_registered():
    for method in Interpolator:
        assert BaseInterpolator.has_interpolator(method)


def test_linear_fill():
    filled = fill_gaps(series_of([1.0, np.nan, np.nan, 4.0]), GapFillConfig(interpolator=Interpolator.LINEAR))
    np.testing.assert_allclose(filled.values, [1.0, 2.0, 3.0, 4.0])


def test_only_interior_runs_up_to_l_max_are_filled():
    values = [np.nan, 0.1, 0.2, np.nan, np.nan, np.nan, 0.3, np.nan, 0.4, np.nan]
    filled = fill_gaps(series_of(values), GapFillConfig(l_max=2, interpolator=Interpolator.LINEAR))
    assert np.isnan(filled.values[0])
    assert np.isnan(filled.values[-1])
    assert np.isnan(filled.values[3:6]).all()
    assert filled.values[7] == pytest.approx(0.35)


@pytest.mark.parametrize("method", [m for m in Interpolator if m is not Interpolator.GP])
def test_present_values_are_never_modified(method, grid, rng):
    series = seasonal_series(grid, rng, noise=0.02)
    values = series.values.copy()
    values[rng.choice(grid.length, 40, replace=False)] = np.nan
    thinned = series.with_values(values)
    filled = fill_gaps(thinned, GapFillConfig(interpolator=method))
    present = thinned.present_mask
    np.testing.assert_array_equal(filled.values[present], thinned.values[present])


def test_quadratic_recovers_a_parabola():
    t = np.arange(12, dtype=float)
    truth = 0.01 * (t - 5.0) ** 2 + 0.2
    values = truth.copy()
    values[5:8] = np.nan
    filled = fill_gaps(series_of(values), GapFillConfig(interpolator=Interpolator.QUADRATIC))
    np.testing.assert_allclose(filled.values, truth, atol=1e-12)


def test_last_and_mean_value():
    values = [0.2, np.nan, 0.4, 0.6]
    assert fill_gaps(series_of(values), GapFillConfig(interpolator=Interpolator.LAST_VALUE)).values[1] == 0.2
    assert fill_gaps(series_of(values), GapFillConfig(interpolator=Interpolator.MEAN_VALUE)).values[1] \
        == pytest.approx(0.4)


def test_gp_without_support_warns_and_leaves_the_gap():
    warnings = []
    filled = fill_gaps(series_of([0.2, np.nan, 0.3, 0.4]), GapFillConfig(interpolator=Interpolator.GP), warnings)
    assert np.isnan(filled.values[1])
    assert len(warnings) == 1
    assert isinstance(warnings[0], FillWarning)
    assert warnings[0].length == 1


def test_savitzky_golay_keeps_quadratics():
    t = np.arange(20, dtype=float)
    truth = 0.001 * t ** 2 - 0.01 * t + 0.3
    smoothed = savitzky_golay(series_of(truth), GapFillConfig())
    np.testing.assert_allclose(smoothed.values, truth, atol=1e-12)


def test_savitzky_golay_does_not_cross_gaps(rng):
    values = rng.uniform(0.2, 0.6, 30)
    values[12] = np.nan
    changed = values.copy()
    changed[13:] += 0.3
    cfg = GapFillConfig()
    a = savitzky_golay(series_of(values), cfg).values
    b = savitzky_golay(series_of(changed), cfg).values
    np.testing.assert_array_equal(a[:12], b[:12])
    assert np.isnan(a[12])


def test_short_runs_pass_through(rng):
    values = np.concatenate([rng.uniform(0.2, 0.6, 5), [np.nan], rng.uniform(0.2, 0.6, 20)])
    smoothed = savitzky_golay(series_of(values), GapFillConfig(savgol_window=7))
    np.testing.assert_array_equal(smoothed.values[:5], values[:5])
    assert not np.array_equal(smoothed.values[6:], values[6:])


@pytest.mark.parametrize("kwargs", [dict(l_max=0), dict(savgol_window=6), dict(savgol_order=7),
                                    dict(interpolator="SPLINE")])
def test_invalid_gapfill_config(kwargs):
    with pytest.raises(InvalidValueError):
        GapFillConfig(**kwargs)


def test_forecast_mode_view_only_sees_the_past(grid, rng):
    series = seasonal_series(grid, rng, noise=0.02)
    values = series.values.copy()
    values[rng.choice(grid.length, 50, replace=False)] = np.nan
    raw = series.with_values(values)
    cfg = GapFillConfig()
    builder = ForecastModeBuilder(raw, cfg)
    for issue in (30, 101, grid.length - 1):
        expected = preprocess(raw.truncated_at(issue), cfg)
        view = builder.at(issue)
        assert view.grid == expected.grid
        np.testing.assert_allclose(view.values, expected.values, rtol=0, atol=1e-12)
        np.testing.assert_array_equal(view.present_mask, expected.present_mask)


def test_forecast_mode_with_global_interpolator(grid, rng):
    raw = seasonal_series(grid, rng, noise=0.02)
    values = raw.values.copy()
    values[[10, 40, 41]] = np.nan
    raw = raw.with_values(values)
    cfg = GapFillConfig(interpolator=Interpolator.MEAN_VALUE)
    view = ForecastModeBuilder(raw, cfg).at(50)
    assert view == preprocess(raw.truncated_at(50), cfg)


def test_compare_ranks_smooth_interpolators_well(grid, rng):
    series_set = [seasonal_series(grid, rng, noise=0.005, base=0.3 + 0.1 * k) for k in range(3)]
    methods = [Interpolator.LINEAR, Interpolator.QUADRATIC, Interpolator.MEAN_VALUE]
    scores = compare_interpolators(series_set, drop_count=20, seed=3, methods=methods)
    by_method = {s.method: s for s in scores}
    assert by_method[Interpolator.LINEAR].r2 > 0.9
    assert by_method[Interpolator.QUADRATIC].r2 > 0.9
    assert by_method[Interpolator.MEAN_VALUE].r2 < by_method[Interpolator.LINEAR].r2
    assert all(s.held_out == 60 and s.filled == 60 for s in scores)

    again = compare_interpolators(series_set, drop_count=20, seed=3, methods=methods)
    assert scores == again
    assert list(scores_frame(scores)["method"]) == ["LINEAR", "QUADRATIC", "MEAN_VALUE"]


def test_compare_on_constant_series_is_degenerate(grid):
    flat = WeeklySeries(grid, np.full(grid.length, 0.4))
    (score,) = compare_interpolators([flat], drop_count=5, seed=0, methods=[Interpolator.LINEAR])
    assert score.degenerate
    assert np.isnan(score.r2)


def test_compare_needs_enough_present_values():
    with pytest.raises(InvalidInputError):
        compare_interpolators([series_of([0.1, 0.2, 0.3, 0.4])], drop_count=2, seed=0,
                              methods=[Interpolator.LINEAR])
