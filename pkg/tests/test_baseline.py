import numpy as np
import pytest

from wireoff.baseline import (
    BaselineModel,
    SeasonalSpec,
    TrendSpec,
    WEEK_MINUTES,
    baseline_curve,
    default_changepoints,
    fit_seasonal,
    fit_trend_joint,
    fourier_design,
    fourier_features,
    model_from_dict,
    model_from_json,
    model_to_dict,
    model_to_json,
    predict_baseline,
    sample_future_changepoints,
    tune_hyperparameters,
)
from wireoff.core import MinuteSeries, VolumeSeries
from wireoff.errors import DomainError, FitError

from oracles import ridge_direct

ANCHOR = 29_030_400


def make_model(kappa, delta, changepoints, theta=5.0, beta=None, harmonics=1,
               history_length=WEEK_MINUTES, fit_end_offset=0):
    delta = np.asarray(delta, dtype=float)
    u = np.asarray(changepoints, dtype=float)
    return BaselineModel(
        vendor_id="pay-a",
        beta=np.zeros(2 * harmonics) if beta is None else np.asarray(beta, float),
        kappa=kappa,
        delta=delta,
        gamma=-u * delta,
        theta=theta,
        seasonal=SeasonalSpec(harmonics=harmonics),
        trend=TrendSpec(
            changepoints=tuple(int(c) for c in changepoints),
            changepoint_prior_scale=0.05,
            history_length=history_length,
        ),
        anchor_epoch_minute=ANCHOR,
        fit_end_offset=fit_end_offset,
    )


def test_fourier_features_by_hand():
    f = fourier_features(123.0, 2, WEEK_MINUTES)
    w = 2.0 * np.pi * 123.0 / WEEK_MINUTES
    assert f == pytest.approx([np.cos(w), np.sin(w), np.cos(2 * w), np.sin(2 * w)])


def test_fourier_design_period():
    X0 = fourier_design(np.array([0.0]), 3, WEEK_MINUTES)
    X1 = fourier_design(np.array([float(WEEK_MINUTES)]), 3, WEEK_MINUTES)
    assert X0 == pytest.approx(X1, abs=1e-9)  # one full period apart


def test_fit_seasonal_matches_direct_ridge_solve():
    rng = np.random.default_rng(42)
    obs = MinuteSeries(ANCHOR, -149, rng.normal(0.0, 1.0, 150))
    spec = SeasonalSpec(harmonics=3, seasonality_prior_scale=2.5)
    beta = fit_seasonal(obs, spec)
    X = fourier_design(obs.offsets(), 3, WEEK_MINUTES)
    expected = ridge_direct(X, obs.values, spec.noise_scale / spec.seasonality_prior_scale)
    assert np.linalg.norm(beta - expected) / np.linalg.norm(expected) < 1e-10


def test_fit_seasonal_recovers_known_coefficients():
    beta_true = np.array([0.4, -0.2, 0.1, 0.05])
    offsets = np.arange(-WEEK_MINUTES + 1, 1)
    y = fourier_design(offsets, 2, WEEK_MINUTES) @ beta_true
    obs = MinuteSeries(ANCHOR, int(offsets[0]), y)
    beta = fit_seasonal(obs, SeasonalSpec(harmonics=2, seasonality_prior_scale=1e6))
    assert np.max(np.abs(beta - beta_true)) < 1e-8


def test_fit_seasonal_underdetermined():
    obs = MinuteSeries(ANCHOR, 0, np.ones(5))
    with pytest.raises(FitError):
        fit_seasonal(obs, SeasonalSpec(harmonics=3))


def log_curve(model, offsets, sampled=None):
    return np.log(baseline_curve(model, offsets, sampled))


def test_trend_is_continuous_at_changepoints():
    model = make_model(kappa=3e-4, delta=[-5e-4, 2e-4], changepoints=[-6000, -2000])
    for u in model.trend.changepoints:
        left = log_curve(model, [np.nextafter(float(u), -np.inf)])[0]
        right = log_curve(model, [float(u)])[0]
        assert abs(right - left) < 1e-9


def test_gamma_identity_is_enforced():
    with pytest.raises(DomainError, match="continuity"):
        BaselineModel(
            vendor_id="pay-a",
            beta=np.zeros(2),
            kappa=0.0,
            delta=np.array([1e-3]),
            gamma=np.array([0.5]),  # inconsistent with -u * delta
            theta=0.0,
            seasonal=SeasonalSpec(harmonics=1),
            trend=TrendSpec(changepoints=(-100,), changepoint_prior_scale=0.05,
                            history_length=1000),
            anchor_epoch_minute=ANCHOR,
        )


def synth_log_volume(offsets, theta, kappa, changepoints, deltas, beta, harmonics):
    y = theta + kappa * offsets
    for u, d in zip(changepoints, deltas):
        mask = offsets >= u
        y = y + np.where(mask, d * (offsets - u), 0.0)
    return y + fourier_design(offsets, harmonics, WEEK_MINUTES) @ beta


def test_joint_fit_recovers_slopes_and_seasonality():
    # two full weeks: a trend over a single period is collinear with the
    # first harmonic, so one week cannot separate slope from seasonality
    rng = np.random.default_rng(9)
    offsets = np.arange(-2 * WEEK_MINUTES + 1, 1)
    theta, kappa = 5.0, 2e-4
    cps, deltas = (-5000,), (-4e-4,)
    beta_true = np.array([0.05, 0.03])
    y = synth_log_volume(offsets, theta, kappa, cps, deltas, beta_true, 1)
    y = y + rng.normal(0.0, 0.005, offsets.size)
    obs = MinuteSeries(ANCHOR, int(offsets[0]), y)

    model = fit_trend_joint(
        obs,
        SeasonalSpec(harmonics=1),
        # a loose L1 scale: tight ones visibly shrink the slope adjustments
        TrendSpec(changepoints=cps, changepoint_prior_scale=0.5,
                  history_length=offsets.size),
    )
    assert model.kappa == pytest.approx(kappa, rel=0.1)
    assert model.kappa + model.delta[0] == pytest.approx(kappa + deltas[0], rel=0.1)
    assert model.beta == pytest.approx(beta_true, abs=0.01)
    # fitted curve stays continuous across the estimated changepoint
    u = float(cps[0])
    assert abs(log_curve(model, [u])[0] - log_curve(model, [np.nextafter(u, -np.inf)])[0]) < 1e-9


def test_joint_fit_requires_matching_history_length():
    obs = MinuteSeries(ANCHOR, -99, np.zeros(100) + 1.0)
    tspec = TrendSpec(changepoints=(), changepoint_prior_scale=0.05, history_length=50)
    with pytest.raises(DomainError):
        fit_trend_joint(obs, SeasonalSpec(harmonics=1), tspec)


def test_sampled_future_changepoints_keep_continuity_identity():
    model = make_model(kappa=1e-4, delta=[-2e-4], changepoints=[-3000])
    fut = sample_future_changepoints(model, horizon=60, rng_seed=5)
    assert fut.n_historical == 1
    assert fut.delta.size == 1 + 60
    np.testing.assert_array_equal(fut.delta[:1], model.delta)
    np.testing.assert_array_equal(fut.gamma[:1], model.gamma)
    for j in range(1, 61):
        assert fut.gamma[1 + j - 1] == pytest.approx(-j * fut.delta[1 + j - 1], abs=0.0)
    # same seed, same draws
    again = sample_future_changepoints(model, horizon=60, rng_seed=5)
    np.testing.assert_array_equal(fut.delta, again.delta)


def test_future_changepoints_bend_the_forecast():
    # dense historical changepoints so the per-minute sampling rate D/(M+1)
    # is large enough to draw future ones quickly
    cps = list(range(-90, -40, 2))
    model = make_model(kappa=0.0, delta=np.zeros(len(cps)), changepoints=cps,
                       theta=1.0, history_length=100)
    for seed in range(50):
        fut = sample_future_changepoints(model, horizon=30, rng_seed=seed)
        if np.any(fut.delta[fut.n_historical:] != 0.0):
            curve = baseline_curve(model, np.arange(1, 31), fut)
            flat = baseline_curve(model, np.arange(1, 31))
            assert not np.allclose(curve, flat)
            return
    pytest.fail("no future changepoint drawn in 50 seeds")


def test_default_changepoints_grid():
    cps = default_changepoints(-9999, 0, 25)
    assert len(cps) == 25
    assert all(b > a for a, b in zip(cps, cps[1:]))
    assert cps[0] > -9999
    assert cps[-1] <= -9999 + 0.8 * 9999 + 1
    assert default_changepoints(0, 10, 0) == ()


def test_predict_baseline_rejects_past():
    model = make_model(kappa=0.0, delta=[], changepoints=[])
    with pytest.raises(DomainError):
        predict_baseline(model, 0)


def test_baseline_curve_overflow_is_reported():
    model = make_model(kappa=1.0, delta=[], changepoints=[], theta=0.0)
    with pytest.raises(FitError, match="diverged"):
        baseline_curve(model, [1000.0])


def test_model_serialization_round_trip():
    model = make_model(kappa=3e-4, delta=[-5e-4], changepoints=[-4000],
                       beta=[0.2, -0.1], fit_end_offset=-1)
    doc = model_to_dict(model)
    assert doc["vendor_id"] == "pay-a"
    assert doc["H"] == 1
    back = model_from_dict(doc)
    assert back.kappa == model.kappa
    np.testing.assert_array_equal(back.beta, model.beta)
    np.testing.assert_array_equal(back.gamma, model.gamma)
    assert back.trend.changepoints == model.trend.changepoints

    again = model_from_json(model_to_json(model))
    assert again.theta == model.theta
    assert again.fit_end_offset == -1


def test_tune_requires_holdout_after_train():
    series = VolumeSeries(ANCHOR, -199, np.full(200, 50.0), vendor_id="pay-a")
    with pytest.raises(DomainError):
        tune_hyperparameters(series, series, trials=1, rng_seed=0)


def test_tune_picks_lowest_holdout_rmse():
    rng = np.random.default_rng(3)
    offsets = np.arange(-2879, 1)
    y = np.exp(4.0 + 0.05 * np.sin(2 * np.pi * offsets / 1440) + rng.normal(0, 0.01, 2880))
    train = VolumeSeries(ANCHOR, -2879, y[:-360], vendor_id="pay-a")
    holdout = VolumeSeries(ANCHOR, -359, y[-360:], vendor_id="pay-a")
    result = tune_hyperparameters(train, holdout, trials=3, rng_seed=1)
    scored = [t.rmse for t in result.trials if t.rmse is not None]
    assert result.holdout_rmse == min(scored)
    # deterministic for a fixed seed
    again = tune_hyperparameters(train, holdout, trials=3, rng_seed=1)
    assert again.holdout_rmse == result.holdout_rmse
    assert again.seasonal == result.seasonal
