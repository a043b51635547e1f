"""Short-horizon availability forecasting via double exponential smoothing.

The problematic vendor's availability over the last few minutes is smoothed
into a level and a local linear trend; the forecast extrapolates that line
and is clamped to [0, 1] because downstream code consumes it as a success
probability. The two smoothing factors have no closed-form optimum, so
fitting is a seeded random search over the unit square.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import AvailabilitySeries
from .errors import DomainError, FitError, ValidationError

__all__ = [
    "DesModel",
    "des_run",
    "des_fit",
    "des_forecast",
    "des_forecast_raw",
    "rolling_validate",
    "des_to_dict",
    "des_from_dict",
    "des_to_json",
    "des_from_json",
]

# The four corners of the (alpha, eta) square are always evaluated first:
# boundary settings (e.g. alpha=1 on noiseless data) are often exactly
# optimal and a finite uniform sample would miss them.
CORNER_PAIRS = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))

DEFAULT_TRIALS = 256


@dataclass(frozen=True)
class DesModel:
    """Fitted smoothing state at the end of the training window."""

    alpha: float
    eta: float
    level: float  # smoothed availability at the window end
    trend: float  # smoothed per-minute change at the window end
    window: tuple[int, int]  # (start_offset, end_offset) of the fit
    fit_rmse: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must be in [0, 1], got {self.eta}")
        if self.fit_rmse < 0.0:
            raise DomainError("fit_rmse must be non-negative")


def _check_pair(alpha: float, eta: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must be in [0, 1], got {alpha}")
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"eta must be in [0, 1], got {eta}")


def des_run(
    obs: AvailabilitySeries, alpha: float, eta: float
) -> tuple[np.ndarray, np.ndarray, float]:
    """Run the smoothing recursions over the whole series.

    Initialization: the level starts at the first observation and the trend
    at the first difference. Returns the level sequence, the trend sequence,
    and the in-sample RMSE of (observation - level - trend) over every
    point, including the initialization one.
    """
    _check_pair(alpha, eta)
    a = obs.values
    n = a.size
    if n < 2:
        raise FitError("need at least 2 observations to initialize the trend")
    S = np.empty(n)
    b = np.empty(n)
    S[0] = a[0]
    b[0] = a[1] - a[0]
    for i in range(1, n):
        S[i] = alpha * a[i] + (1.0 - alpha) * (S[i - 1] + b[i - 1])
        b[i] = eta * (S[i] - S[i - 1]) + (1.0 - eta) * b[i - 1]
    rmse = float(np.sqrt(np.mean((a - S - b) ** 2)))
    return S, b, rmse


def _rmse_batch(a: np.ndarray, alphas: np.ndarray, etas: np.ndarray) -> np.ndarray:
    """In-sample RMSE for many (alpha, eta) pairs in one pass over time.

    Elementwise arithmetic is kept in exactly the order des_run uses, so
    each lane reproduces the scalar level/trend recursion bit for bit. The
    squared errors are accumulated sequentially here, whereas des_run sums
    them with np.mean; those can differ in the last ulp, which is why the
    fit reports the lane value rather than recomputing it.
    """
    S = np.full(alphas.shape, a[0])
    b = np.full(alphas.shape, a[1] - a[0])
    sq = (a[0] - S - b) ** 2
    for i in range(1, a.size):
        S_new = alphas * a[i] + (1.0 - alphas) * (S + b)
        b = etas * (S_new - S) + (1.0 - etas) * b
        S = S_new
        sq += (a[i] - S - b) ** 2
    return np.sqrt(sq / a.size)


def des_fit(
    obs: AvailabilitySeries,
    trials: int = DEFAULT_TRIALS,
    rng_seed: int | np.random.SeedSequence = 0,
    *,
    return_trials: bool = False,
):
    """Random search for the (alpha, eta) pair minimizing in-sample RMSE.

    Evaluates the four corner pairs plus `trials` uniform samples; ties are
    broken by lowest trial index, so results are deterministic per seed.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    a = obs.values
    if a.size < 2:
        raise FitError("need at least 2 observations to initialize the trend")
    rng = np.random.default_rng(rng_seed)
    pairs = np.vstack([np.array(CORNER_PAIRS), rng.random((trials, 2))])
    rmses = _rmse_batch(a, pairs[:, 0], pairs[:, 1])
    best = 0
    for i in range(1, len(pairs)):
        if rmses[i] < rmses[best]:
            best = i
    alpha, eta = float(pairs[best, 0]), float(pairs[best, 1])
    S, b, _ = des_run(obs, alpha, eta)
    model = DesModel(
        alpha=alpha,
        eta=eta,
        level=float(S[-1]),
        trend=float(b[-1]),
        window=(obs.start_offset, obs.end_offset),
        fit_rmse=float(rmses[best]),
    )
    if return_trials:
        trial_log = [
            (i, float(p[0]), float(p[1]), float(r)) for i, (p, r) in enumerate(zip(pairs, rmses))
        ]
        return model, trial_log
    return model


def des_forecast_raw(model: DesModel, m: int) -> float:
    """Unclamped linear extrapolation m minutes past the window end."""
    if m < 1:
        raise DomainError(f"forecast horizon must be >= 1, got {m}")
    return model.level + m * model.trend


def des_forecast(model: DesModel, m: int) -> float:
    """Availability forecast m minutes ahead, clamped into [0, 1]."""
    return min(1.0, max(0.0, des_forecast_raw(model, m)))


def rolling_validate(
    obs: AvailabilitySeries,
    window: int = 10,
    horizon: int = 2,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> list[tuple[int, float]]:
    """Rolling-origin backtest: fit on [M-window, M], score [M+1, M+horizon].

    Returns (window_end_offset, horizon_rmse) per eligible origin.
    """
    if window < 1 or horizon < 1:
        raise DomainError("window and horizon must be >= 1")
    if len(obs) < window + horizon + 1:
        raise ValidationError(
            f"series of length {len(obs)} too short for window={window}, horizon={horizon}"
        )
    results = []
    for end in range(obs.start_offset + window, obs.end_offset - horizon + 1):
        train = obs.slice(end - window, end)
        model = des_fit(train, trials, np.random.SeedSequence([seed, end - obs.start_offset]))
        predicted = np.array([des_forecast(model, m) for m in range(1, horizon + 1)])
        actual = obs.slice(end + 1, end + horizon).values
        results.append((end, float(np.sqrt(np.mean((actual - predicted) ** 2)))))
    return results


def des_to_dict(model: DesModel) -> dict:
    return {
        "alpha": model.alpha,
        "eta": model.eta,
        "S0": model.level,
        "b0": model.trend,
        "window": list(model.window),
        "fit_rmse": model.fit_rmse,
    }


def des_from_dict(doc: dict) -> DesModel:
    return DesModel(
        alpha=doc["alpha"],
        eta=doc["eta"],
        level=doc["S0"],
        trend=doc["b0"],
        window=tuple(doc["window"]),
        fit_rmse=doc["fit_rmse"],
    )


def des_to_json(model: DesModel) -> str:
    return json.dumps(des_to_dict(model), sort_keys=True)


def des_from_json(text: str) -> DesModel:
    return des_from_dict(json.loads(text))
