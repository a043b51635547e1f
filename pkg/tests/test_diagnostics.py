import numpy as np
import pytest
from scipy import special, stats

from wireoff.diagnostics import (
    DW_BAND,
    acf,
    build_report,
    durbin_watson,
    harvey_collier,
    qq_points,
    recursive_residuals,
    report_to_dict,
    rmse,
)
from wireoff.errors import AlignmentError, DomainError, FitError


def test_dw_alternating_signs_is_ten_thirds():
    assert durbin_watson([1.0, -1.0, 1.0, -1.0, 1.0, -1.0]) == 10.0 / 3.0


def test_dw_white_noise_near_two():
    r = np.random.default_rng(12).standard_normal(500)
    assert durbin_watson(r) == pytest.approx(2.0, abs=0.2)


def test_dw_positive_autocorrelation_is_low():
    rng = np.random.default_rng(13)
    r = np.zeros(500)
    for i in range(1, 500):
        r[i] = 0.9 * r[i - 1] + rng.standard_normal()
    assert durbin_watson(r) < DW_BAND[0]


def test_dw_relates_to_lag1_autocorrelation():
    r = np.random.default_rng(14).standard_normal(500)
    assert abs(durbin_watson(r) - 2.0 * (1.0 - acf(r, 1)[1])) < 10.0 / 500


def test_dw_input_validation():
    with pytest.raises(DomainError):
        durbin_watson([1.0])
    with pytest.raises(DomainError):
        durbin_watson(np.zeros(10))


def test_recursive_residuals_frozen_reference():
    # verified against a standard recursive-residuals routine to 2e-15
    rng = np.random.default_rng(55)
    x = np.linspace(0.1, 5.0, 80)
    y = 2.0 + 1.5 * x + 0.3 * rng.standard_normal(80)
    rr = recursive_residuals(y, np.column_stack([np.ones(80), x]))
    assert rr.size == 78
    assert rr[:6] == pytest.approx(
        [0.79479326, 0.56034171, -0.40228096, 0.08772127, 0.34309873, -0.47757198],
        abs=1e-8,
    )


def test_recursive_residuals_vanish_on_exact_fit():
    x = np.linspace(1.0, 9.0, 30)
    rr = recursive_residuals(3.0 * x, x[:, None])
    assert np.max(np.abs(rr)) < 1e-10


def test_recursive_residuals_validation():
    x = np.linspace(0.0, 1.0, 10)
    with pytest.raises(DomainError):
        recursive_residuals(x[:3], x[:3, None])  # n < k + 3
    with pytest.raises(FitError):
        recursive_residuals(x, np.zeros((10, 2)))  # rank-deficient prefix


def test_harvey_collier_null_model():
    rng = np.random.default_rng(55)
    x = np.linspace(0.1, 5.0, 80)
    y = 2.0 + 1.5 * x + 0.3 * rng.standard_normal(80)
    t, p = harvey_collier(y, x, intercept=True)
    assert t == pytest.approx(-0.7384, abs=1e-3)
    assert p > 0.05


def test_harvey_collier_flags_curvature():
    rng = np.random.default_rng(55)
    x = np.linspace(0.0, 4.0, 120)
    y = 1.0 + 0.5 * x + 0.35 * x**2 + 0.3 * rng.standard_normal(120)
    t, p = harvey_collier(y, x, intercept=True)
    assert t > 5.0
    assert p < 1e-6


def test_harvey_collier_degenerate_exact_fit():
    x = np.linspace(1.0, 5.0, 40)
    t, p = harvey_collier(2.0 * x, x)
    assert (t, p) == (0.0, 1.0)


def test_acf_by_hand():
    r = np.array([1.0, 2.0, 3.0, 4.0])
    centered = r - r.mean()
    expected_lag1 = (centered[:-1] @ centered[1:]) / (centered @ centered)
    values = acf(r, 2)
    assert values[0] == 1.0
    assert values[1] == pytest.approx(expected_lag1)
    with pytest.raises(DomainError):
        acf(r, 4)
    with pytest.raises(DomainError):
        acf(np.full(5, 3.3), 1)


def test_qq_points_structure():
    r = np.random.default_rng(20).standard_normal(101)
    qq = qq_points(r)
    assert qq.shape == (101, 2)
    assert qq[50, 0] == pytest.approx(special.ndtri(0.5 * (2 * 51 - 1) / 101))
    assert np.all(np.diff(qq[:, 1]) >= 0.0)
    # standardized: mean 0, sample std 1
    assert qq[:, 1].mean() == pytest.approx(0.0, abs=1e-12)
    assert np.std(qq[:, 1], ddof=1) == pytest.approx(1.0, rel=1e-12)


def test_qq_points_affine_invariant():
    r = np.random.default_rng(21).standard_normal(60)
    a = qq_points(r)
    b = qq_points(7.5 * r - 3.0)
    np.testing.assert_allclose(a[:, 1], b[:, 1], atol=1e-12)


def test_qq_points_heavy_tails_escape_the_diagonal():
    # standardization lets one monster outlier pull the other tail inward,
    # so the claim is about the worst tail, not both
    for seed in (33, 34, 35):
        r = stats.t(df=2).rvs(size=600, random_state=seed)
        qq = qq_points(r)
        assert max(qq[-1, 1], -qq[0, 1]) > qq[-1, 0]


def test_qq_points_validation():
    with pytest.raises(DomainError):
        qq_points([1.0, 2.0])
    with pytest.raises(DomainError):
        qq_points(np.ones(10))


def test_rmse():
    assert rmse([1.0, 2.0], [1.0, 4.0]) == pytest.approx(np.sqrt(2.0))
    with pytest.raises(AlignmentError):
        rmse([1.0], [1.0, 2.0])


def test_build_report_consistency():
    rng = np.random.default_rng(90)
    x = np.linspace(10.0, 200.0, 300)
    noise = rng.standard_normal(300) * 0.5
    y = 0.4 * x + noise
    delta = float(x @ y / (x @ x))
    residuals = y - delta * x
    report = build_report(y, x, residuals)
    assert report.dw_in_band() is (DW_BAND[0] <= report.dw_statistic <= DW_BAND[1])
    assert report.hc_passes() is (report.hc_p_value > 0.05)
    assert report.acf_ci_halfwidth == pytest.approx(np.sqrt(2.0 / 300))
    assert report.rmse == pytest.approx(np.sqrt(np.mean(residuals**2)))
    assert report.qq.shape == (300, 2)
    # healthy fit on well-specified data
    assert report.dw_in_band() and report.hc_passes() and report.acf_lag1_within_ci()

    doc = report_to_dict(report)
    assert doc["dw_in_band"] is True
    assert doc["hc_passes"] is True
    assert len(doc["qq_points"]) == 300
