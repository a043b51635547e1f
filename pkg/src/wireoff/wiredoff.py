"""Wired-off volume model: migration slope plus stationarity check.

When the problematic vendor is disabled, the other vendors absorb a fixed
fraction of its would-be volume. That fraction is a through-origin
least-squares slope fitted on historical wire-off windows; a constant
slope is justified by checking that the per-minute migration ratio is
stationary (augmented Dickey-Fuller test).
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import MinuteSeries
from .errors import AlignmentError, DomainError, FitError, ValidationError

__all__ = [
    "WiredOffModel",
    "AdfResult",
    "estimate_slope",
    "predict_wiredoff",
    "migration_ratio",
    "stationarity_check",
    "wiredoff_to_dict",
    "wiredoff_from_dict",
    "wiredoff_to_json",
    "wiredoff_from_json",
    "adf_to_dict",
    "ADF_CRITICAL_VALUES",
]

# MacKinnon asymptotic critical values for the constant-only regression.
ADF_CRITICAL_VALUES = {"1%": -3.43, "5%": -2.86, "10%": -2.57}

MIN_ADF_LENGTH = 25


@dataclass(frozen=True, eq=False)
class WiredOffModel:
    """Fitted migration slope with its residuals."""

    delta: float
    fit_offsets: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not math.isfinite(self.delta):
            raise DomainError("delta must be finite")
        offsets = np.asarray(self.fit_offsets, dtype=np.int64).copy()
        residuals = np.asarray(self.residuals, dtype=float).copy()
        if offsets.size != residuals.size:
            raise DomainError("one residual per fitted time required")
        offsets.setflags(write=False)
        residuals.setflags(write=False)
        object.__setattr__(self, "fit_offsets", offsets)
        object.__setattr__(self, "residuals", residuals)


def _extract(
    w_off, c_n0, c_other
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Pull aligned value arrays plus offsets out of series or raw vectors."""
    series = [s for s in (w_off, c_n0, c_other) if isinstance(s, MinuteSeries)]
    if series:
        if len(series) != 3:
            raise AlignmentError("mix of minute series and raw vectors is ambiguous")
        anchors = {s.anchor_epoch_minute for s in series}
        if len(anchors) != 1:
            raise AlignmentError("inputs have different anchors")
        spans = {(s.start_offset, s.end_offset) for s in series}
        if len(spans) != 1:
            raise AlignmentError(f"inputs cover different offset ranges: {sorted(spans)}")
        return w_off.values, c_n0.values, c_other.values, w_off.offsets()
    arrays = [np.asarray(v, dtype=float) for v in (w_off, c_n0, c_other)]
    if len({a.size for a in arrays}) != 1:
        raise AlignmentError("inputs have different lengths")
    return (*arrays, np.arange(arrays[0].size))


def estimate_slope(w_off, c_n0, c_other) -> WiredOffModel:
    """Through-origin least squares of (W_off - C_other) on C_n0.

    The slope is the fraction of the disabled vendor's baseline volume
    that reappears on the other vendors.
    """
    w, n0, other, offsets = _extract(w_off, c_n0, c_other)
    if w.size == 0:
        raise DomainError("need at least one observation")
    denom = float(n0 @ n0)
    if denom <= 0.0:
        raise FitError("disabled-vendor baseline is identically zero: slope unidentifiable")
    excess = w - other
    delta = float(n0 @ excess) / denom
    residuals = excess - delta * n0
    model = WiredOffModel(delta=delta, fit_offsets=offsets, residuals=residuals)
    if abs(delta) > 1.5:
        # Not an error (no constraint is imposed), but a slope this far
        # outside [0, 1] usually means the baselines are misfit.
        logging.getLogger(__name__).warning(
            "migration slope %.3f is far outside [0, 1]; check baseline fits", delta
        )
    return model


def predict_wiredoff(model: WiredOffModel, c_n0_future, c_other_future):
    """Wired-off volume forecast: delta * C_n0 + C_other."""
    n0 = np.asarray(c_n0_future, dtype=float)
    other = np.asarray(c_other_future, dtype=float)
    if not (np.all(np.isfinite(n0)) and np.all(np.isfinite(other))):
        raise DomainError("baseline forecasts must be finite")
    if np.any(n0 <= 0.0) or np.any(other <= 0.0):
        raise DomainError("baseline forecasts must be positive")
    result = model.delta * n0 + other
    if np.ndim(c_n0_future) == 0 and np.ndim(c_other_future) == 0:
        return float(result)
    return result


def migration_ratio(w_off, c_n0, c_other):
    """Per-minute migrated fraction (W_off - C_other) / C_n0.

    Returns a MinuteSeries when given series inputs, else an ndarray.
    """
    w, n0, other, _ = _extract(w_off, c_n0, c_other)
    if np.any(n0 == 0.0):
        raise DomainError("cannot form migration ratio where the baseline is zero")
    ratio = (w - other) / n0
    if isinstance(w_off, MinuteSeries):
        return MinuteSeries(
            anchor_epoch_minute=w_off.anchor_epoch_minute,
            start_offset=w_off.start_offset,
            values=ratio,
        )
    return ratio


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    used_lag: int
    n_obs: int
    stationary: bool
    critical_values: tuple[tuple[str, float], ...] = tuple(
        sorted(ADF_CRITICAL_VALUES.items())
    )


def _ols_aic(y: np.ndarray, X: np.ndarray) -> float:
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    n = y.size
    sigma2 = float(resid @ resid) / n
    if sigma2 <= 0.0:
        return -math.inf
    llf = -0.5 * n * (math.log(2.0 * math.pi) + math.log(sigma2) + 1.0)
    return -2.0 * llf + 2.0 * X.shape[1]


def _adf_design(x: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Regression pieces for the unit-root test with p lagged differences.

    Response: first differences. Regressors: lagged level, p lagged
    differences, constant (in that column order).
    """
    dx = np.diff(x)
    n = dx.size - p
    y = dx[p:]
    cols = [x[p:-1]]
    for lag in range(1, p + 1):
        cols.append(dx[p - lag : dx.size - lag])
    cols.append(np.ones(n))
    return y, np.column_stack(cols)


def stationarity_check(ratio) -> AdfResult:
    """Augmented Dickey-Fuller test with constant, AIC-selected lag order.

    Lag order is chosen by AIC on a common maxlag-trimmed sample, then the
    test regression is refit at that order on the longest usable sample.
    The verdict is stationary when the statistic falls below the 5%
    critical value.
    """
    values = ratio.values if isinstance(ratio, MinuteSeries) else np.asarray(ratio, dtype=float)
    T = values.size
    if T < MIN_ADF_LENGTH:
        raise ValidationError(f"need at least {MIN_ADF_LENGTH} points for the ADF test, got {T}")
    max_lag = int(math.floor(12.0 * (T / 100.0) ** 0.25))
    # Keep enough rows to estimate every candidate model.
    max_lag = min(max_lag, T // 2 - 2)

    # Lag selection on the fixed maxlag-trimmed sample so AICs are comparable.
    y_sel, X_sel = _adf_design(values, max_lag)
    level_col = X_sel[:, :1]
    const_col = X_sel[:, -1:]
    diff_cols = X_sel[:, 1:-1]
    best_lag = 0
    best_aic = math.inf
    for p in range(0, max_lag + 1):
        X_p = np.hstack([const_col, level_col, diff_cols[:, :p]])
        aic = _ols_aic(y_sel, X_p)
        if aic < best_aic:
            best_aic = aic
            best_lag = p

    y, X = _adf_design(values, best_lag)
    coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise FitError("ADF regression is rank deficient")
    resid = y - X @ coef
    dof = y.size - X.shape[1]
    if dof < 1:
        raise ValidationError("not enough observations for the chosen lag order")
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    stat = float(coef[0] / math.sqrt(cov[0, 0]))
    return AdfResult(
        statistic=stat,
        used_lag=best_lag,
        n_obs=y.size,
        stationary=stat < ADF_CRITICAL_VALUES["5%"],
    )


def wiredoff_to_dict(model: WiredOffModel) -> dict:
    return {
        "delta": model.delta,
        "fit_window": model.fit_offsets.tolist(),
        "residuals": model.residuals.tolist(),
    }


def wiredoff_from_dict(doc: dict) -> WiredOffModel:
    return WiredOffModel(
        delta=doc["delta"],
        fit_offsets=np.asarray(doc["fit_window"], dtype=np.int64),
        residuals=np.asarray(doc["residuals"], dtype=float),
    )


def wiredoff_to_json(model: WiredOffModel) -> str:
    return json.dumps(wiredoff_to_dict(model), sort_keys=True)


def wiredoff_from_json(text: str) -> WiredOffModel:
    return wiredoff_from_dict(json.loads(text))


def adf_to_dict(result: AdfResult) -> dict:
    return {
        "statistic": result.statistic,
        "used_lag": result.used_lag,
        "n_obs": result.n_obs,
        "stationary": result.stationary,
        "critical_values": {name: value for name, value in result.critical_values},
    }
