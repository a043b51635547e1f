"""Multiplicative-seasonality baseline volume model.

A vendor's per-minute volume is modeled as exp(seasonal) * exp(trend):
a weekly Fourier series plus a piecewise-linear trend with changepoints,
fit jointly in log space by MAP estimation (ridge on the Fourier
coefficients and the trend line, Laplace/L1 on the changepoint slope
adjustments).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import MinuteSeries, VolumeSeries, to_log
from .errors import DomainError, FitError, TuneError

__all__ = [
    "SeasonalSpec",
    "TrendSpec",
    "BaselineModel",
    "FutureChangepoints",
    "fourier_features",
    "fourier_design",
    "fit_seasonal",
    "fit_trend_joint",
    "sample_future_changepoints",
    "predict_baseline",
    "baseline_curve",
    "default_changepoints",
    "tune_hyperparameters",
    "TuningResult",
    "TrialRecord",
    "model_to_dict",
    "model_from_dict",
    "model_to_json",
    "model_from_json",
]

WEEK_MINUTES = 10080

# Gaussian prior scale for the base growth rate and offset (in standardized
# time, so this is intentionally weak).
KAPPA_THETA_PRIOR_SCALE = 5.0


@dataclass(frozen=True)
class SeasonalSpec:
    """Configuration of the Fourier seasonal component."""

    harmonics: int
    period: int = WEEK_MINUTES
    seasonality_prior_scale: float = 10.0
    noise_scale: float = 1.0

    def __post_init__(self):
        if self.harmonics < 1:
            raise DomainError(f"harmonics must be >= 1, got {self.harmonics}")
        if self.period < 2:
            raise DomainError(f"period must be >= 2, got {self.period}")
        if not self.seasonality_prior_scale > 0:
            raise DomainError("seasonality_prior_scale must be positive")
        if not self.noise_scale > 0:
            raise DomainError("noise_scale must be positive")


@dataclass(frozen=True)
class TrendSpec:
    """Configuration of the piecewise-linear trend component."""

    changepoints: tuple[int, ...]
    changepoint_prior_scale: float
    history_length: int

    def __post_init__(self):
        cps = tuple(int(u) for u in self.changepoints)
        object.__setattr__(self, "changepoints", cps)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise DomainError("changepoints must be strictly increasing")
        if not self.changepoint_prior_scale > 0:
            raise DomainError("changepoint_prior_scale must be positive")
        if self.history_length < 1:
            raise DomainError("history_length must be positive")
        if len(cps) >= self.history_length:
            raise DomainError(
                f"need fewer changepoints ({len(cps)}) than observations ({self.history_length})"
            )

    @property
    def n_changepoints(self) -> int:
        return len(self.changepoints)


@dataclass(frozen=True, eq=False)
class BaselineModel:
    """Fitted baseline volume model for one vendor."""

    vendor_id: str
    beta: np.ndarray = field(repr=False)
    kappa: float
    delta: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    theta: float
    seasonal: SeasonalSpec
    trend: TrendSpec
    anchor_epoch_minute: int
    fit_end_offset: int = 0

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        delta = np.asarray(self.delta, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        for name, arr in (("beta", beta), ("delta", delta), ("gamma", gamma)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.beta.size != 2 * self.seasonal.harmonics:
            raise DomainError(
                f"beta has length {self.beta.size}, expected {2 * self.seasonal.harmonics}"
            )
        if self.delta.size != self.trend.n_changepoints or self.gamma.size != self.delta.size:
            raise DomainError("delta/gamma must have one entry per changepoint")
        u = np.asarray(self.trend.changepoints, dtype=float)
        expected_gamma = -u * self.delta
        scale = 1.0 + np.abs(expected_gamma)
        if self.delta.size and np.max(np.abs(self.gamma - expected_gamma) / scale) > 1e-9:
            raise DomainError("gamma must equal -u_d * delta_d (trend continuity)")

    @property
    def fit_start_offset(self) -> int:
        return self.fit_end_offset - self.trend.history_length + 1


@dataclass(frozen=True, eq=False)
class FutureChangepoints:
    """Historical deltas/gammas extended with sampled future ones.

    Entry D + j (1-indexed j) applies to forecasts at offsets >= j.
    """

    delta: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    n_historical: int
    horizon: int


def fourier_features(m: float, harmonics: int, period: int) -> np.ndarray:
    """Seasonality feature vector (cos h=1, sin h=1, ..., cos H, sin H)."""
    if harmonics < 1:
        raise DomainError(f"harmonics must be >= 1, got {harmonics}")
    if period < 2:
        raise DomainError(f"period must be >= 2, got {period}")
    return fourier_design(np.array([m], dtype=float), harmonics, period)[0]


def fourier_design(offsets: np.ndarray, harmonics: int, period: int) -> np.ndarray:
    """Design matrix with one fourier_features row per offset."""
    offsets = np.asarray(offsets, dtype=float)
    h = np.arange(1, harmonics + 1)
    angles = (2.0 * np.pi / period) * np.outer(offsets, h)
    X = np.empty((offsets.size, 2 * harmonics))
    X[:, 0::2] = np.cos(angles)
    X[:, 1::2] = np.sin(angles)
    return X


def fit_seasonal(log_obs: MinuteSeries, spec: SeasonalSpec) -> np.ndarray:
    """MAP estimate of the Fourier coefficients (ridge closed form).

    Solves (X'X + (sigma/sigma')^2 I) beta = X'y through an augmented
    least-squares system, which is better conditioned than forming the
    normal equations directly.
    """
    n = len(log_obs)
    p = 2 * spec.harmonics
    if n < p:
        raise FitError(f"{n} observations cannot identify {p} Fourier coefficients")
    X = fourier_design(log_obs.offsets(), spec.harmonics, spec.period)
    ridge = spec.noise_scale / spec.seasonality_prior_scale
    A = np.vstack([X, ridge * np.eye(p)])
    y = np.concatenate([log_obs.values, np.zeros(p)])
    try:
        beta, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - lstsq rarely raises
        raise FitError(f"seasonal fit failed: {exc}") from exc
    if rank < p or not np.all(np.isfinite(beta)):
        raise FitError("regularized seasonal system is numerically singular")
    return beta


def _trend_columns(t_std: np.ndarray, u_std: np.ndarray) -> np.ndarray:
    """[slope, offset, hinge per changepoint] columns in standardized time."""
    cols = [t_std, np.ones_like(t_std)]
    for u in u_std:
        cols.append(np.clip(t_std - u, 0.0, None))
    return np.column_stack(cols)


def _soft_threshold(x: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - thresholds, 0.0)


def fit_trend_joint(
    log_obs: MinuteSeries,
    sspec: SeasonalSpec,
    tspec: TrendSpec,
    *,
    vendor_id: str = "",
    max_iter: int = 10000,
    tol: float = 1e-10,
) -> BaselineModel:
    """Joint MAP fit of seasonal and trend parameters.

    Minimizes ||y - (X beta + trend)||^2 / (2 sigma^2) plus the Gaussian
    penalties on beta, kappa, theta and the Laplace (L1) penalty on the
    changepoint slope adjustments. The L1 term rules out a closed form, so
    the solver is an accelerated proximal-gradient iteration with a
    backtracking safeguard. Time is standardized to [0, 1] and the target
    centered at its mean before solving; parameters are mapped back to
    per-minute units afterwards, which keeps the fit exactly equivariant
    under rescaling of the input volumes.
    """
    y = np.asarray(log_obs.values, dtype=float)
    n = y.size
    if n < 2:
        raise FitError("need at least 2 observations to fit a trend")
    if tspec.history_length != n:
        raise DomainError(
            f"trend spec expects {tspec.history_length} observations, series has {n}"
        )
    m0, m1 = log_obs.start_offset, log_obs.end_offset
    u = np.asarray(tspec.changepoints, dtype=float)
    if u.size and (u.min() < m0 or u.max() > m1):
        raise DomainError(f"changepoints must lie within the history window [{m0}, {m1}]")

    span = float(m1 - m0)
    t_std = (log_obs.offsets() - m0) / span
    u_std = (u - m0) / span

    X = fourier_design(log_obs.offsets(), sspec.harmonics, sspec.period)
    A = np.hstack([X, _trend_columns(t_std, u_std)])
    n_beta = 2 * sspec.harmonics
    D = tspec.n_changepoints
    p = n_beta + 2 + D

    y_mean = float(y.mean())
    yc = y - y_mean

    sigma2 = sspec.noise_scale**2
    l2 = np.zeros(p)
    l2[:n_beta] = 1.0 / sspec.seasonality_prior_scale**2
    l2[n_beta : n_beta + 2] = 1.0 / KAPPA_THETA_PRIOR_SCALE**2
    l1 = np.zeros(p)
    l1[n_beta + 2 :] = 1.0 / tspec.changepoint_prior_scale

    # Scale columns to unit norm so the Gram matrix is well conditioned;
    # both penalties transform diagonally so the problem is unchanged.
    col_norms = np.linalg.norm(A, axis=0)
    col_norms[col_norms == 0.0] = 1.0
    As = A / col_norms
    l2s = l2 / col_norms**2
    l1s = l1 / col_norms

    G = As.T @ As / sigma2
    c = As.T @ yc / sigma2
    const = float(yc @ yc) / (2.0 * sigma2)
    H = G + np.diag(l2s)

    def smooth(x):
        return 0.5 * x @ (H @ x) - c @ x + const

    def objective(x):
        return smooth(x) + float(l1s @ np.abs(x))

    lipschitz = float(np.linalg.eigvalsh(H)[-1])
    step = 1.0 / max(lipschitz, 1e-30)

    # Warm start at the minimizer with the L1 term dropped.
    try:
        x = np.linalg.solve(H, c)
    except np.linalg.LinAlgError:
        x = np.linalg.lstsq(H, c, rcond=None)[0]
    if not np.all(np.isfinite(x)):
        x = np.zeros(p)

    def prox_step(v):
        nonlocal step
        grad = H @ v - c
        for _ in range(60):
            cand = _soft_threshold(v - step * grad, step * l1s)
            d = cand - v
            gain = smooth(cand) - smooth(v) - grad @ d
            if gain <= (d @ d) / (2.0 * step) + 1e-12 * (1.0 + abs(smooth(v))):
                return cand
            step *= 0.5
        return cand  # pragma: no cover - step = 1/L always satisfies the bound

    x_prev = x
    f_prev = objective(x)
    z = x
    t_momentum = 1.0
    converged = False
    for _ in range(max_iter):
        cand = prox_step(z)
        f_cand = objective(cand)
        if f_cand <= f_prev:
            x = cand
            f = f_cand
        else:
            # Momentum overshoot: fall back to a plain descent step.
            x = prox_step(x_prev)
            f = objective(x)
            t_momentum = 1.0
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_momentum**2))
        z = x + ((t_momentum - 1.0) / t_next) * (x - x_prev)
        decrease = f_prev - f
        x_prev, f_prev, t_momentum = x, f, t_next
        if 0.0 <= decrease < tol:
            converged = True
            break
    if not converged:
        raise FitError(f"joint fit did not converge in {max_iter} iterations (objective {f_prev})")

    phi = x_prev / col_norms
    beta = phi[:n_beta]
    kappa_std = phi[n_beta]
    theta_std = phi[n_beta + 1]
    delta = phi[n_beta + 2 :] / span
    kappa = kappa_std / span
    gamma = -u * delta
    theta = theta_std + y_mean - kappa * m0
    if not (np.all(np.isfinite(beta)) and math.isfinite(kappa) and math.isfinite(theta)):
        raise FitError("joint fit produced non-finite parameters")

    return BaselineModel(
        vendor_id=vendor_id,
        beta=beta,
        kappa=kappa,
        delta=delta,
        gamma=gamma,
        theta=theta,
        seasonal=sspec,
        trend=tspec,
        anchor_epoch_minute=log_obs.anchor_epoch_minute,
        fit_end_offset=m1,
    )


def sample_future_changepoints(
    model: BaselineModel, horizon: int, rng_seed: int
) -> FutureChangepoints:
    """Extend the trend with randomly sampled future changepoints.

    Each future minute 1..horizon becomes a changepoint with probability
    D / (M + 1); its slope adjustment is drawn from the Laplace prior and
    the matching continuity correction is -m * delta.
    """
    if horizon < 1:
        raise DomainError(f"horizon must be >= 1, got {horizon}")
    rng = np.random.default_rng(rng_seed)
    prob = model.trend.n_changepoints / model.trend.history_length
    mask = rng.random(horizon) < prob
    draws = rng.laplace(0.0, model.trend.changepoint_prior_scale, size=horizon)
    future_delta = np.where(mask, draws, 0.0)
    future_gamma = -np.arange(1, horizon + 1, dtype=float) * future_delta
    return FutureChangepoints(
        delta=np.concatenate([model.delta, future_delta]),
        gamma=np.concatenate([model.gamma, future_gamma]),
        n_historical=model.trend.n_changepoints,
        horizon=horizon,
    )


def _log_trend(
    model: BaselineModel,
    offsets: np.ndarray,
    future: FutureChangepoints | None,
) -> np.ndarray:
    m = np.asarray(offsets, dtype=float)
    slope = np.full_like(m, model.kappa)
    intercept = np.full_like(m, model.theta)
    for u, d, g in zip(model.trend.changepoints, model.delta, model.gamma):
        active = m >= u
        slope[active] += d
        intercept[active] += g
    if future is not None:
        fdelta = future.delta[future.n_historical :]
        fgamma = future.gamma[future.n_historical :]
        for j, (d, g) in enumerate(zip(fdelta, fgamma), start=1):
            if d == 0.0:
                continue
            active = m >= j
            slope[active] += d
            intercept[active] += g
    return slope * m + intercept


def baseline_curve(
    model: BaselineModel,
    offsets,
    sampled_future: FutureChangepoints | None = None,
) -> np.ndarray:
    """Volume forecast/fitted values at arbitrary minute offsets."""
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    X = fourier_design(offsets, model.seasonal.harmonics, model.seasonal.period)
    log_value = X @ model.beta + _log_trend(model, offsets, sampled_future)
    if np.any(log_value > 709.0):
        raise FitError("forecast overflows: trend fit diverged")
    return np.exp(log_value)


def predict_baseline(
    model: BaselineModel,
    m: int,
    sampled_future: FutureChangepoints | None = None,
) -> float:
    """Forecast volume at future offset m >= 1 (seasonal times trend)."""
    if m < 1:
        raise DomainError(f"forecast offset must be >= 1, got {m}")
    return float(baseline_curve(model, [m], sampled_future)[0])


def default_changepoints(start_offset: int, end_offset: int, count: int = 25) -> tuple[int, ...]:
    """Candidate changepoints spread uniformly over the first 80% of history."""
    if count < 1:
        return ()
    limit = start_offset + 0.8 * (end_offset - start_offset)
    grid = np.linspace(start_offset, limit, count + 1)[1:]
    cps = sorted(set(int(round(g)) for g in grid))
    return tuple(c for c in cps if start_offset < c <= end_offset)


@dataclass(frozen=True)
class TrialRecord:
    index: int
    seasonal: SeasonalSpec
    trend: TrendSpec
    rmse: float | None
    error: str | None = None


@dataclass(frozen=True)
class TuningResult:
    seasonal: SeasonalSpec
    trend: TrendSpec
    holdout_rmse: float
    trials: tuple[TrialRecord, ...]


# Search bounds for the random hyperparameter search.
SEASONALITY_PRIOR_BOUNDS = (0.01, 10.0)
CHANGEPOINT_PRIOR_BOUNDS = (0.001, 1.0)
HARMONICS_BOUNDS = (10, 30)


def tune_hyperparameters(
    train: VolumeSeries,
    holdout: VolumeSeries,
    trials: int,
    rng_seed: int,
    *,
    n_changepoints: int = 25,
    period: int = WEEK_MINUTES,
) -> TuningResult:
    """Random search over prior scales and harmonic count.

    Prior scales are sampled log-uniformly, the harmonic count uniformly;
    the winner minimizes holdout RMSE of the volume forecast, with ties
    broken by lowest trial index.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if holdout.start_offset <= train.end_offset:
        raise DomainError("holdout must start strictly after the training window")
    log_train = to_log(train)
    changepoints = default_changepoints(train.start_offset, train.end_offset, n_changepoints)
    # Keep D < M + 1 even on very short training windows.
    changepoints = changepoints[: max(0, len(train) - 1)]
    rng = np.random.default_rng(rng_seed)
    holdout_offsets = holdout.offsets()

    records: list[TrialRecord] = []
    best: TrialRecord | None = None
    for index in range(trials):
        sp_lo, sp_hi = SEASONALITY_PRIOR_BOUNDS
        cp_lo, cp_hi = CHANGEPOINT_PRIOR_BOUNDS
        sigma_prime = 10.0 ** rng.uniform(math.log10(sp_lo), math.log10(sp_hi))
        lam = 10.0 ** rng.uniform(math.log10(cp_lo), math.log10(cp_hi))
        harmonics = int(rng.integers(HARMONICS_BOUNDS[0], HARMONICS_BOUNDS[1] + 1))
        sspec = SeasonalSpec(
            harmonics=harmonics, period=period, seasonality_prior_scale=sigma_prime
        )
        tspec = TrendSpec(
            changepoints=changepoints,
            changepoint_prior_scale=lam,
            history_length=len(train),
        )
        try:
            model = fit_trend_joint(log_train, sspec, tspec, vendor_id=train.vendor_id)
            forecast = baseline_curve(model, holdout_offsets)
            rmse = float(np.sqrt(np.mean((forecast - holdout.values) ** 2)))
            record = TrialRecord(index, sspec, tspec, rmse)
        except FitError as exc:
            record = TrialRecord(index, sspec, tspec, None, error=str(exc))
        records.append(record)
        if record.rmse is not None and (best is None or record.rmse < best.rmse):
            best = record
    if best is None:
        raise TuneError(f"all {trials} hyperparameter trials failed to fit")
    return TuningResult(
        seasonal=best.seasonal,
        trend=best.trend,
        holdout_rmse=best.rmse,
        trials=tuple(records),
    )


def model_to_dict(model: BaselineModel) -> dict:
    return {
        "vendor_id": model.vendor_id,
        "anchor": model.anchor_epoch_minute,
        "H": model.seasonal.harmonics,
        "L": model.seasonal.period,
        "sigma": model.seasonal.noise_scale,
        "sigma_prime": model.seasonal.seasonality_prior_scale,
        "lambda": model.trend.changepoint_prior_scale,
        "beta": model.beta.tolist(),
        "kappa": model.kappa,
        "delta": model.delta.tolist(),
        "gamma": model.gamma.tolist(),
        "theta": model.theta,
        "changepoints": list(model.trend.changepoints),
        "history_length": model.trend.history_length,
        "fit_end_offset": model.fit_end_offset,
    }


def model_from_dict(doc: dict) -> BaselineModel:
    seasonal = SeasonalSpec(
        harmonics=doc["H"],
        period=doc["L"],
        seasonality_prior_scale=doc["sigma_prime"],
        noise_scale=doc.get("sigma", 1.0),
    )
    trend = TrendSpec(
        changepoints=tuple(doc["changepoints"]),
        changepoint_prior_scale=doc["lambda"],
        history_length=doc["history_length"],
    )
    return BaselineModel(
        vendor_id=doc["vendor_id"],
        beta=np.asarray(doc["beta"], dtype=float),
        kappa=doc["kappa"],
        delta=np.asarray(doc["delta"], dtype=float),
        gamma=np.asarray(doc["gamma"], dtype=float),
        theta=doc["theta"],
        seasonal=seasonal,
        trend=trend,
        anchor_epoch_minute=doc["anchor"],
        fit_end_offset=doc.get("fit_end_offset", 0),
    )


def model_to_json(model: BaselineModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def model_from_json(text: str) -> BaselineModel:
    return model_from_dict(json.loads(text))
