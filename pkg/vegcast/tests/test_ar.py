import numpy as np
import pytest

from vegcast.ar import ARConfig, ar_fit, ar_forecast, fit_at, forecastable, lag_design, persistence_forecast
from vegcast.core import IndexKind, IndexSeries, InvalidValueError, NoForecast, ReasonCode, TimeGrid, WeeklySeries

from .conftest import START


def simulate_ar(coefficients, n, seed=0, mean=0.0, noise=1.0):
    rng = np.random.default_rng(seed)
    p = len(coefficients)
    x = np.zeros(n + 100)
    for t in range(p, len(x)):
        x[t] = np.dot(coefficients, x[t - p:t][::-1]) + rng.normal(0.0, noise)
    return x[100:] + mean


def weekly(values):
    return WeeklySeries(TimeGrid(START, len(values)), values)


def test_lag_design_puts_the_latest_lag_first():
    design, targets = lag_design(np.arange(6, dtype=float), order=2, lead=2)
    np.testing.assert_array_equal(design, [[1, 0], [2, 1], [3, 2]])
    np.testing.assert_array_equal(targets, [3, 4, 5])


def test_lag_design_drops_rows_touching_gaps():
    values = np.arange(8, dtype=float)
    values[3] = np.nan
    design, targets = lag_design(values, order=2, lead=1)
    assert not np.isnan(design).any() and not np.isnan(targets).any()
    # rows whose lags or target include slot 3
    assert len(targets) == 6 - 3


def test_fit_recovers_ar2_coefficients():
    x = simulate_ar([0.6, -0.3], 3000, seed=1)
    cfg = ARConfig(order=2, train_length=3000, lead=1)
    model = ar_fit(x, cfg)
    np.testing.assert_allclose(model.coefficients, [0.6, -0.3], atol=0.05)
    assert model.residual_std == pytest.approx(1.0, abs=0.05)
    assert model.rows == 3000 - 2 - 1 + 1


def brute_force_coefficients(window, order, lead):
    """Least squares on explicitly built regression rows of the demeaned window."""
    y = window - window.mean()
    rows, targets = [], []
    for t in range(order - 1, len(y) - lead):
        rows.append([y[t - k] for k in range(order)])
        targets.append(y[t + lead])
    return np.linalg.lstsq(np.array(rows), np.array(targets), rcond=None)[0]


def test_fit_matches_brute_force_least_squares():
    rng = np.random.default_rng(12)
    for _ in range(100):
        lead = int(rng.integers(1, 6))
        window = simulate_ar(rng.uniform(-0.3, 0.3, 3), 200, seed=int(rng.integers(1 << 30)),
                             mean=rng.uniform(-10, 10))
        model = ar_fit(window, ARConfig(order=3, train_length=200, lead=lead))
        np.testing.assert_allclose(model.coefficients, brute_force_coefficients(window, 3, lead), rtol=0, atol=1e-8)


def test_fit_recovers_ar3_coefficients_on_average():
    truth = np.array([0.5, -0.2, 0.15])
    estimates = [ar_fit(simulate_ar(truth, 200, seed=seed, noise=0.1), ARConfig(order=3, train_length=200, lead=1))
                 .coefficients for seed in range(20)]
    np.testing.assert_allclose(np.mean(estimates, axis=0), truth, atol=0.1)


@pytest.mark.parametrize("seed", range(5))
def test_residuals_are_orthogonal_to_the_lags(seed):
    window = simulate_ar([0.6, 0.1, -0.2], 200, seed=seed, mean=30.0)
    window[np.random.default_rng(seed).choice(200, 8, replace=False)] = np.nan
    cfg = ARConfig(order=3, train_length=200, lead=2)
    model = ar_fit(window, cfg)
    design, targets = lag_design(window - model.training_mean, cfg.order, cfg.lead)
    residuals = targets - design @ np.array(model.coefficients)
    np.testing.assert_allclose(design.T @ residuals, 0.0, atol=1e-6)


@pytest.mark.parametrize("shift", [-25.0, 3.5, 250.0])
@pytest.mark.parametrize("source", ["window", "history"])
def test_demeaned_forecast_follows_a_level_shift(shift, source):
    values = simulate_ar([0.6, 0.2], 300, seed=13, mean=40.0)
    cfg = ARConfig(order=2, train_length=120, lead=4, demean_source=source)
    series = weekly(values)
    issue = series.grid.slot_date(250)
    shifted = ar_forecast(weekly(values + shift), issue, cfg)
    assert shifted == pytest.approx(ar_forecast(series, issue, cfg) + shift, abs=1e-9)


def test_direct_multi_step_coefficient():
    x = simulate_ar([0.8], 4000, seed=2)
    model = ar_fit(x, ARConfig(order=1, train_length=4000, lead=3))
    assert model.coefficients[0] == pytest.approx(0.8 ** 3, abs=0.05)


def test_demeaning_removes_the_training_mean():
    x = simulate_ar([0.5], 500, seed=3, mean=40.0)
    model = ar_fit(x, ARConfig(order=1, train_length=500, lead=1))
    assert model.training_mean == pytest.approx(np.mean(x))
    assert model.coefficients[0] == pytest.approx(0.5, abs=0.1)
    raw = ar_fit(x, ARConfig(order=1, train_length=500, lead=1, demean=False))
    assert raw.training_mean == 0.0
    # without demeaning the lag soaks up the level
    assert raw.coefficients[0] > 0.95


def test_constant_window_is_degenerate():
    model = ar_fit(np.full(50, 42.0), ARConfig(order=3, train_length=50, lead=2))
    assert model.degenerate
    assert model.predict([42.0, 42.0, 42.0]) == 42.0


def test_predict_uses_the_issue_value_as_first_lag():
    x = simulate_ar([0.7, 0.2], 400, seed=4)
    model = ar_fit(x, ARConfig(order=2, train_length=400, lead=1))
    a0, a1 = model.coefficients
    m = model.training_mean
    assert model.predict([3.0, 5.0]) == pytest.approx(m + a0 * (5.0 - m) + a1 * (3.0 - m))


@pytest.mark.parametrize("kwargs", [dict(order=0), dict(lead=0), dict(order=5, lead=5, train_length=19),
                                    dict(demean_source="global")])
def test_invalid_ar_config(kwargs):
    with pytest.raises(InvalidValueError):
        ARConfig(**kwargs)


def test_forecastable_reasons():
    cfg = ARConfig(order=3, train_length=40, lead=2)
    values = simulate_ar([0.5], 100, seed=5)
    assert forecastable(values, 38, cfg).reason is ReasonCode.INSUFFICIENT_HISTORY
    assert forecastable(values, 39, cfg) is None

    gappy = values.copy()
    gappy[58] = np.nan
    assert forecastable(gappy, 61, cfg) is None
    for issue in (58, 59, 60):
        assert forecastable(gappy, issue, cfg).reason is ReasonCode.GAP

    strict = ARConfig(order=3, train_length=40, lead=2, strict_window=True)
    assert forecastable(gappy, 70, strict).reason is ReasonCode.GAP
    assert forecastable(gappy, 98, strict) is None


def test_relaxed_window_needs_enough_complete_rows():
    cfg = ARConfig(order=3, train_length=40, lead=2, min_valid_fraction=0.8)
    values = simulate_ar([0.5], 100, seed=6)
    values[50:60:3] = np.nan
    result = forecastable(values, 79, cfg)
    assert isinstance(result, NoForecast)
    assert result.reason is ReasonCode.GAP


def test_history_mean_source():
    values = simulate_ar([0.5], 300, seed=7, mean=10.0)
    values[:100] += 20.0
    cfg = ARConfig(order=2, train_length=100, lead=1, demean_source="history")
    model = fit_at(values, 250, cfg)
    assert model.training_mean == pytest.approx(np.mean(values[:251]))


def test_forecast_never_reads_past_the_issue_date():
    values = simulate_ar([0.6, 0.2], 300, seed=8, mean=50.0)
    cfg = ARConfig(order=2, train_length=120, lead=4)
    series = IndexSeries(weekly(np.clip(values, 0, 100)), IndexKind.VCI3M, "R")
    issue = series.grid.slot_date(200)
    changed = series.values.copy()
    changed[201:] = 0.0
    other = series.with_series(series.series.with_values(changed))
    forecast = ar_forecast(series, issue, cfg)
    assert isinstance(forecast, float)
    assert ar_forecast(other, issue, cfg) == forecast


def test_forecast_matches_fitted_model():
    values = simulate_ar([0.6], 200, seed=9)
    cfg = ARConfig(order=2, train_length=100, lead=3)
    model = fit_at(values, 150, cfg)
    series = weekly(values)
    assert ar_forecast(series, series.grid.slot_date(150), cfg) == pytest.approx(model.predict(values[149:151]))


def test_persistence():
    values = np.array([10.0, 20.0, np.nan, 40.0])
    series = weekly(values)
    assert persistence_forecast(series, series.grid.slot_date(1), 6) == 20.0
    gap = persistence_forecast(series, series.grid.slot_date(2))
    assert isinstance(gap, NoForecast)
    assert gap.reason is ReasonCode.GAP
