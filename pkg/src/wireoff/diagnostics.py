"""Residual diagnostics for the fitted volume models.

Covers the checks used to vet a fit before trusting its forecasts:
Durbin-Watson for serial correlation, Harvey-Collier for linearity,
autocorrelation with its confidence band, normal QQ data, and RMSE.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .errors import AlignmentError, DomainError, FitError

__all__ = [
    "DiagnosticsReport",
    "durbin_watson",
    "harvey_collier",
    "acf",
    "qq_points",
    "rmse",
    "build_report",
    "report_to_dict",
    "report_to_json",
    "DW_BAND",
    "HC_P_THRESHOLD",
]

# Acceptance heuristics for a healthy fit.
DW_BAND = (1.5, 3.5)
HC_P_THRESHOLD = 0.05


def durbin_watson(residuals) -> float:
    """Sum of squared successive differences over sum of squares.

    Near 2 means no first-order serial correlation; 0 and 4 are the
    perfectly correlated extremes.
    """
    r = np.asarray(residuals, dtype=float)
    if r.size < 2:
        raise DomainError("need at least 2 residuals")
    denom = float(r @ r)
    if denom == 0.0:
        raise DomainError("residuals are identically zero")
    return float(np.sum(np.diff(r) ** 2)) / denom


def recursive_residuals(y, X) -> np.ndarray:
    """Standardized one-step-ahead prediction errors of sequential least
    squares, computed by rank-one updates of the inverse normal matrix."""
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if n < k + 3:
        raise DomainError(f"need at least {k + 3} observations, got {n}")
    X0 = X[:k]
    try:
        P = np.linalg.inv(X0.T @ X0)
    except np.linalg.LinAlgError as exc:
        raise FitError("first observations are rank deficient") from exc
    if not np.all(np.isfinite(P)):
        raise FitError("first observations are rank deficient")
    beta = P @ X0.T @ y[:k]
    out = np.empty(n - k)
    for i in range(k, n):
        x_i = X[i]
        Px = P @ x_i
        denom = 1.0 + float(x_i @ Px)
        out[i - k] = (y[i] - float(x_i @ beta)) / math.sqrt(denom)
        # Sherman-Morrison update of the inverse, then the coefficient.
        P = P - np.outer(Px, Px) / denom
        beta = beta + P @ x_i * (y[i] - float(x_i @ beta))
    return out


def harvey_collier(y, x, *, intercept: bool = False) -> tuple[float, float]:
    """t-test that the recursive residuals of the linear fit have mean zero.

    A drifting mean in the recursive residuals signals a misspecified
    (non-linear) relationship. Defaults to the through-origin regression;
    pass intercept=True to include a constant column.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        X = x[:, None]
    else:
        X = x
    if intercept:
        X = np.column_stack([X, np.ones(X.shape[0])])
    if y.size != X.shape[0]:
        raise AlignmentError("y and x must have the same length")
    w = recursive_residuals(y, X)
    if np.all(w == 0.0):
        return 0.0, 1.0
    nw = w.size
    se = float(np.std(w, ddof=1)) / math.sqrt(nw)
    if se == 0.0:
        return (math.inf if w[0] > 0 else -math.inf), 0.0
    statistic = float(np.mean(w)) / se
    p_value = 2.0 * float(stats.t.sf(abs(statistic), df=nw - 1))
    return statistic, p_value


def acf(residuals, max_lag: int) -> np.ndarray:
    """Sample autocorrelations (biased normalization), lags 0..max_lag."""
    r = np.asarray(residuals, dtype=float)
    n = r.size
    if max_lag < 0:
        raise DomainError("max_lag must be non-negative")
    if n <= max_lag:
        raise DomainError(f"need more than {max_lag} observations, got {n}")
    centered = r - r.mean()
    c0 = float(centered @ centered) / n
    if c0 == 0.0:
        raise DomainError("residuals have zero variance")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for h in range(1, max_lag + 1):
        out[h] = float(centered[:-h] @ centered[h:]) / n / c0
    return out


def qq_points(residuals) -> np.ndarray:
    """(theoretical, sample) normal QQ pairs for standardized residuals.

    Sample quantiles are the sorted residuals after subtracting the mean
    and dividing by the sample standard deviation; theoretical quantiles
    sit at the (i - 0.5)/n probability points.
    """
    r = np.asarray(residuals, dtype=float)
    n = r.size
    if n < 3:
        raise DomainError(f"need at least 3 residuals, got {n}")
    std = float(np.std(r, ddof=1))
    if std == 0.0:
        raise DomainError("residuals have zero variance")
    sample = np.sort((r - r.mean()) / std)
    theoretical = special.ndtri((np.arange(1, n + 1) - 0.5) / n)
    return np.column_stack([theoretical, sample])


def rmse(actual, predicted) -> float:
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.size != p.size:
        raise AlignmentError(f"length mismatch: {a.size} vs {p.size}")
    if a.size == 0:
        raise DomainError("need at least one observation")
    return float(np.sqrt(np.mean((a - p) ** 2)))


@dataclass(frozen=True, eq=False)
class DiagnosticsReport:
    dw_statistic: float
    hc_statistic: float
    hc_p_value: float
    acf_lag1: float
    acf_ci_halfwidth: float
    qq: np.ndarray = field(repr=False)
    rmse: float

    def dw_in_band(self) -> bool:
        return DW_BAND[0] <= self.dw_statistic <= DW_BAND[1]

    def hc_passes(self) -> bool:
        return self.hc_p_value > HC_P_THRESHOLD

    def acf_lag1_within_ci(self) -> bool:
        return abs(self.acf_lag1) <= self.acf_ci_halfwidth


def build_report(y, x, residuals, *, intercept: bool = False) -> DiagnosticsReport:
    """Assemble the full report for a linear fit of y on x."""
    residuals = np.asarray(residuals, dtype=float)
    hc_statistic, hc_p = harvey_collier(y, x, intercept=intercept)
    n = residuals.size
    return DiagnosticsReport(
        dw_statistic=durbin_watson(residuals),
        hc_statistic=hc_statistic,
        hc_p_value=hc_p,
        acf_lag1=float(acf(residuals, 1)[1]),
        acf_ci_halfwidth=math.sqrt(2.0 / n),
        qq=qq_points(residuals),
        rmse=float(np.sqrt(np.mean(residuals**2))),
    )


def report_to_dict(report: DiagnosticsReport) -> dict:
    return {
        "dw_statistic": report.dw_statistic,
        "dw_in_band": report.dw_in_band(),
        "hc_statistic": report.hc_statistic,
        "hc_p_value": report.hc_p_value,
        "hc_passes": report.hc_passes(),
        "acf_lag1": report.acf_lag1,
        "acf_ci_halfwidth": report.acf_ci_halfwidth,
        "acf_lag1_within_ci": report.acf_lag1_within_ci(),
        "qq_points": report.qq.tolist(),
        "rmse": report.rmse,
    }


def report_to_json(report: DiagnosticsReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True)
