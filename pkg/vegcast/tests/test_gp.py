from datetime import timedelta

import numpy as np
import pytest

from vegcast.core import (ConditioningError, IndexKind, IndexSeries, InvalidInputError, InvalidValueError, NoForecast,
                          ObservationSeries, ParseError, ReasonCode, Sample, TimeGrid, WeeklySeries)
from vegcast.gp import (GapFillMode, KernelCandidate, Primitive, build_kernel, candidate_structures,
                        candidates_frame, canonical_structure, condition, gp_fit, gp_forecast, gp_gapfill, gp_predict,
                        is_psd, jitchol, kernel_search, log_marginal_likelihood, model_from_text, model_to_text,
                        parse_structure, predict_arrays, rank_candidates)

from .conftest import START, pixel


def smooth_data(n=40, noise=0.01, seed=0):
    rng = np.random.default_rng(seed)
    times = np.arange(n, dtype=float)
    return times, np.sin(times / 5.0) + rng.normal(0.0, noise, n)


def test_jitchol_factorises_a_singular_gram():
    gram = np.ones((4, 4))
    factor, jitter = jitchol(gram)
    assert jitter > 0
    np.testing.assert_allclose(factor @ factor.T, gram + jitter * np.eye(4), atol=1e-12)


def test_jitchol_gives_up_on_indefinite_matrices():
    with pytest.raises(ConditioningError):
        jitchol(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ConditioningError):
        jitchol(np.zeros((3, 3)))


def test_structures_parse_and_canonicalise():
    assert parse_structure("RBF+PERIODIC*RBF") == [[Primitive.RBF], [Primitive.PERIODIC, Primitive.RBF]]
    assert canonical_structure("rbf + per*matern") == "RBF+PERIODIC*MATERN52"
    with pytest.raises(InvalidValueError):
        parse_structure("RBF+SPLINE")
    with pytest.raises(InvalidValueError):
        parse_structure(" ")


def test_candidate_structures_cover_pairs():
    structures = candidate_structures()
    assert len(structures) == 6 + 2 * 15
    assert "RBF+PERIODIC" in structures and "RBF*PERIODIC" in structures
    assert candidate_structures(["RBF", "LINEAR"]) == ["RBF", "LINEAR", "RBF+LINEAR", "RBF*LINEAR"]


@pytest.mark.parametrize("structure", candidate_structures())
def test_every_candidate_kernel_is_psd(structure):
    assert is_psd(build_kernel(structure), np.arange(40, dtype=float) - 20.0)


def test_periodic_period_is_fixed():
    kernel = build_kernel("PERIODIC")
    names = [h.name for h in kernel.hyperparameters if not h.fixed]
    assert not any(name.endswith("periodicity") for name in names)


def test_ranking_prefers_the_simpler_structure_on_ties():
    simple = KernelCandidate("RBF", 10.0)
    nested = KernelCandidate("RBF+PERIODIC", 10.5)
    failed = KernelCandidate("LINEAR", -np.inf, failed=True)
    assert [c.structure for c in rank_candidates([nested, failed, simple])] == ["RBF", "RBF+PERIODIC", "LINEAR"]
    better = KernelCandidate("RBF+PERIODIC", 12.0)
    assert rank_candidates([simple, better])[0] is better


def test_candidate_table():
    ranked = rank_candidates([KernelCandidate("LINEAR", -np.inf, failed=True, detail="no finite likelihood"),
                              KernelCandidate("RBF+PERIODIC", 12.0)])
    frame = candidates_frame(ranked)
    assert list(frame["rank"]) == [1, 2]
    assert list(frame["structure"]) == ["RBF+PERIODIC", "LINEAR"]
    assert list(frame["failed"]) == [False, True]
    assert list(frame["parameter_count"]) == [4, 2]
    assert frame["detail"].iloc[1] == "no finite likelihood"


# natural-unit ranges the random hyperparameter points are drawn from
GRADIENT_RANGES = {"constant_value": (0.5, 2.0), "length_scale": (2.0, 20.0), "alpha": (0.5, 3.0),
                   "sigma_0": (0.5, 2.0)}


def random_theta(kernel, rng):
    theta = [np.log(rng.uniform(*GRADIENT_RANGES[h.name.split("__")[-1]])) for h in kernel.hyperparameters
             if not h.fixed]
    return np.array(theta + [np.log(rng.uniform(0.01, 0.1))])


def check_gradient(structure, points, seed=0, step=1e-5):
    times, values = smooth_data(40, noise=0.1, seed=seed)
    times = times - times.mean()
    kernel = build_kernel(structure)
    rng = np.random.default_rng(seed)
    for _ in range(points):
        theta = random_theta(kernel, rng)
        _, gradient = log_marginal_likelihood(theta, kernel, times, values, eval_gradient=True)
        numeric = np.empty_like(theta)
        for k in range(len(theta)):
            delta = np.zeros_like(theta)
            delta[k] = step
            numeric[k] = (log_marginal_likelihood(theta + delta, kernel, times, values)
                          - log_marginal_likelihood(theta - delta, kernel, times, values)) / (2 * step)
        np.testing.assert_allclose(gradient, numeric, rtol=1e-4, atol=1e-6)


@pytest.mark.parametrize("structure", ["RBF", "RBF+PERIODIC", "MATERN32*LINEAR", "RATIONAL_QUADRATIC+MATERN52"])
def test_likelihood_gradient_matches_finite_differences(structure):
    check_gradient(structure, points=3)


@pytest.mark.slow
@pytest.mark.parametrize("structure", candidate_structures())
def test_likelihood_gradient_at_many_points(structure):
    check_gradient(structure, points=50, seed=1)


def stationary_model(times, values):
    return condition(build_kernel("RBF+PERIODIC", 4.0, 1.0), 0.1, times, values, "RBF+PERIODIC")


@pytest.mark.parametrize("seed", range(5))
def test_more_data_never_widens_the_posterior(seed):
    times, values = smooth_data(30, noise=0.1, seed=seed)
    extra = np.random.default_rng(seed).choice(np.arange(1, 29), 1)[0]
    keep = times != extra
    query = np.linspace(-10.0, 60.0, 141)
    _, fewer = predict_arrays(stationary_model(times[keep], values[keep]), query)
    _, more = predict_arrays(stationary_model(times, values), query)
    assert (more <= fewer + 1e-9).all()


def test_posterior_reverts_to_the_prior_far_from_the_data():
    times, values = smooth_data(40, noise=0.1)
    kernel = build_kernel("RBF", 4.0, 1.5)
    model = condition(kernel, 0.1, times, values, "RBF")
    [(mean, std)] = gp_predict(model, [times[-1] + 10 * 4.0 + 100.0])
    assert mean == pytest.approx(model.mean, abs=1e-9)
    assert std == pytest.approx(np.sqrt(1.5 + 0.1 ** 2), rel=1e-9)
    assert std == pytest.approx(model.prior_std(), rel=1e-9)


def test_forecast_far_ahead_returns_to_the_anomaly_mean():
    grid = TimeGrid(START, 120)
    rng = np.random.default_rng(4)
    values = rng.normal(0.0, 0.02, grid.length)
    series = IndexSeries(WeeklySeries(grid, values - values.mean()), IndexKind.NDVI_ANOMALY, "R")
    issue = 119
    model = gp_fit(np.arange(120, dtype=float), series.values, "RBF", restarts=1)
    lead = int(np.ceil(10 * max(model.length_scales()))) + 1
    mean, _ = gp_forecast(series, grid.slot_date(issue), lead, "RBF", restarts=1, min_history=52)
    assert mean == pytest.approx(0.0, abs=1e-3)


@pytest.mark.slow
def test_rbf_length_scale_is_recovered():
    times = np.arange(300, dtype=float)
    kernel = build_kernel("RBF", 4.0, 1.0)
    gram = kernel(times.reshape(-1, 1)) + 0.1 ** 2 * np.eye(times.size)
    factor = np.linalg.cholesky(gram)
    recovered = 0
    for seed in range(10):
        values = factor @ np.random.default_rng(seed).normal(size=times.size)
        model = gp_fit(times, values, "RBF", restarts=2, seed=seed)
        recovered += abs(model.length_scales()[0] - 4.0) <= 0.3 * 4.0
    assert recovered >= 8


def test_fit_needs_enough_ordered_points():
    times, values = smooth_data(9)
    with pytest.raises(InvalidInputError):
        gp_fit(times, values, "RBF")
    times, values = smooth_data(12)
    with pytest.raises(InvalidInputError):
        gp_fit(times[::-1], values, "RBF")
    values[3] = np.nan
    with pytest.raises(InvalidInputError):
        gp_fit(times, values, "RBF")


def test_fit_interpolates_a_smooth_signal():
    times, values = smooth_data()
    model = gp_fit(times, values, "RBF", restarts=1, seed=3)
    mean, std = predict_arrays(model, times)
    np.testing.assert_allclose(mean, np.sin(times / 5.0), atol=0.05)
    assert (std > 0).all()
    # uncertainty grows away from the data
    (near, near_std), (far, far_std) = gp_predict(model, [20.5, 200.0])
    assert far_std > near_std
    assert far == pytest.approx(model.mean, abs=0.05)


def test_fit_is_deterministic_for_a_seed():
    times, values = smooth_data()
    a = gp_fit(times, values, "RBF", restarts=2, seed=11)
    b = gp_fit(times, values, "RBF", restarts=2, seed=11)
    np.testing.assert_array_equal(a.theta, b.theta)


def test_warm_start_reaches_the_same_optimum():
    times, values = smooth_data()
    cold = gp_fit(times, values, "RBF", restarts=0)
    warm = gp_fit(times, values, "RBF", restarts=0, warm_start=cold.theta)
    assert warm.log_marginal_likelihood >= cold.log_marginal_likelihood - 1e-6


def test_model_text_keeps_predictions():
    times, values = smooth_data()
    model = gp_fit(times, values, "RBF", restarts=0)
    restored = model_from_text(model_to_text(model))
    assert restored.structure == "RBF"
    np.testing.assert_allclose(predict_arrays(restored, [3.5, 50.0]), predict_arrays(model, [3.5, 50.0]),
                               rtol=1e-9)


def test_malformed_model_text():
    with pytest.raises(ParseError):
        model_from_text('{"structure": "RBF"}')
    with pytest.raises(ParseError):
        model_from_text("not json")


def test_forecast_rejects_unforecastable_kinds():
    grid = TimeGrid(START, 60)
    series = IndexSeries(WeeklySeries(grid, np.full(60, 50.0)), IndexKind.VCI, "R")
    with pytest.raises(InvalidInputError):
        gp_forecast(series, grid.slot_date(59), 1)


def test_forecast_needs_history():
    grid = TimeGrid(START, 60)
    values = np.full(60, np.nan)
    values[-20:] = 40.0
    series = IndexSeries(WeeklySeries(grid, values), IndexKind.VCI3M, "R")
    result = gp_forecast(series, grid.slot_date(59), 4, min_history=52)
    assert isinstance(result, NoForecast)
    assert result.reason is ReasonCode.INSUFFICIENT_HISTORY


def daily_pixel(days, seed=0):
    rng = np.random.default_rng(seed)
    dates = [START + timedelta(days=int(d)) for d in days]
    t = np.asarray(days, dtype=float) / 7.0
    return pixel("p", "R", dates, 0.45 + 0.2 * np.sin(2 * np.pi * t / 52.0) + rng.normal(0, 0.005, len(days)))


def test_gapfill_forecast_mode_ignores_later_samples():
    days = np.arange(0, 7 * 40, 8)
    obs = daily_pixel(days)
    grid = TimeGrid(START, 42)
    cutoff = grid.slot_date(20)
    changed = [s if s.date <= cutoff else Sample(s.date, s.value - 0.2, s.quality) for s in obs.samples]
    other = ObservationSeries(obs.pixel_id, obs.region_id, tuple(changed))
    mode = GapFillMode.forecast(cutoff)
    a = gp_gapfill(obs, grid, mode, "RBF", restarts=0)
    b = gp_gapfill(other, grid, mode, "RBF", restarts=0)
    assert isinstance(a, WeeklySeries)
    assert a == b
    assert not np.isnan(a.values).any()


def test_gapfill_needs_ten_samples():
    obs = daily_pixel(np.arange(0, 63, 7))
    result = gp_gapfill(obs, TimeGrid(START, 12), GapFillMode.non_forecast(), "RBF")
    assert isinstance(result, NoForecast)
    assert result.reason is ReasonCode.INSUFFICIENT_DATA


def test_gapfill_mode_arguments():
    with pytest.raises(ValueError):
        GapFillMode.forecast(None)


@pytest.mark.slow
def test_seasonal_forecast_is_close():
    grid = TimeGrid(START, 160)
    t = grid.times()
    rng = np.random.default_rng(5)
    values = 50.0 + 25.0 * np.sin(2 * np.pi * t / 52.0) + rng.normal(0.0, 1.0, grid.length)
    series = IndexSeries(WeeklySeries(grid, values), IndexKind.VCI3M, "R")
    issue = 150
    mean, std = gp_forecast(series, grid.slot_date(issue), 4, "RBF+PERIODIC", restarts=1)
    expected = 50.0 + 25.0 * np.sin(2 * np.pi * (issue + 4) / 52.0)
    assert abs(mean - expected) < 3 * std + 2.0


@pytest.mark.slow
def test_kernel_search_finds_the_seasonal_term():
    times = np.arange(104, dtype=float)
    rng = np.random.default_rng(2)
    values = np.sin(2 * np.pi * times / 52.0) + rng.normal(0.0, 0.05, times.size)
    ranked = kernel_search(times, values, candidate_set=[Primitive.RBF, Primitive.PERIODIC, Primitive.LINEAR],
                           restarts=1)
    assert len(ranked) == 3 + 6
    assert "PERIODIC" in ranked[0].structure
    likelihoods = [c.log_marginal_likelihood for c in ranked if not c.failed]
    assert ranked[0].log_marginal_likelihood >= max(likelihoods) - 1.0
