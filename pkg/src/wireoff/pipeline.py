"""End-to-end wiring: raw inputs to a wire-off recommendation.

The stages mirror how the engine is used during an incident: fit
per-vendor baseline models on volume history, forecast the problematic
vendor's availability, estimate behavior distributions from event logs,
simulate the wired-on horizon, price the wired-off alternative with the
migration slope, and compare the two curves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .availability import DesModel, des_fit
from .baseline import (
    BaselineModel,
    SeasonalSpec,
    TrendSpec,
    baseline_curve,
    default_changepoints,
    fit_trend_joint,
    tune_hyperparameters,
)
from .behavior import AttemptEvent, BehaviorDistributions, estimate
from .core import AvailabilitySeries, MinuteSeries, VolumeSeries, rebase, to_log
from .decision import Recommendation, recommend
from .diagnostics import DiagnosticsReport, build_report
from .errors import ValidationError
from .simulator import (
    DEFAULT_REPLICATIONS,
    DEFAULT_WARMUP_START,
    AvailabilityProvider,
    WiredOnForecast,
    simulate_wiredon,
)
from .wiredoff import (
    MIN_ADF_LENGTH,
    AdfResult,
    WiredOffModel,
    estimate_slope,
    migration_ratio,
    predict_wiredoff,
    stationarity_check,
)

__all__ = [
    "PipelineConfig",
    "PipelineResult",
    "seed_for",
    "fit_baselines",
    "fit_availability",
    "spawn_series",
    "other_total_curve",
    "wiredoff_curve",
    "run_pipeline",
]

# Named sub-stream tags: one master seed reproduces each stage independently.
STREAM_TUNING = 1
STREAM_DES = 2
STREAM_SIMULATION = 3


def seed_for(master_seed: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master_seed, stream])


def _int_seed(master_seed: int, stream: int) -> int:
    return int(seed_for(master_seed, stream).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class PipelineConfig:
    horizon: int = 60
    warmup_start: int = DEFAULT_WARMUP_START
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    threads: int = 1
    # Baseline fitting; tuning_trials = 0 keeps the fixed defaults below.
    tuning_trials: int = 0
    holdout_minutes: int = 1440
    harmonics: int = 10
    seasonality_prior_scale: float = 10.0
    changepoint_prior_scale: float = 0.05
    n_changepoints: int = 25
    # Availability fitting.
    des_window: int = 30
    des_trials: int = 256

    def __post_init__(self):
        if self.horizon < 1:
            raise ValidationError(f"horizon must be >= 1, got {self.horizon}")
        if self.warmup_start > DEFAULT_WARMUP_START:
            raise ValidationError(
                f"warmup_start must be <= {DEFAULT_WARMUP_START}, got {self.warmup_start}"
            )
        if self.replications < 1:
            raise ValidationError(f"replications must be >= 1, got {self.replications}")
        if self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")


@dataclass(frozen=True, eq=False)
class PipelineResult:
    problematic_vendor: str
    baseline_models: dict[str, BaselineModel]
    des_model: DesModel
    behavior: BehaviorDistributions
    wiredon: WiredOnForecast
    wiredoff_model: WiredOffModel
    wiredoff: np.ndarray = field(repr=False)
    recommendation: Recommendation
    diagnostics: DiagnosticsReport | None = None
    stationarity: AdfResult | None = None


def fit_baselines(
    volumes: dict[str, VolumeSeries], config: PipelineConfig
) -> dict[str, BaselineModel]:
    """Fit one baseline model per vendor, optionally tuning hyperparameters.

    Tuning holds out the most recent minutes, searches on the rest, then
    refits the winning settings on the full history.
    """
    models: dict[str, BaselineModel] = {}
    for index, vendor in enumerate(sorted(volumes)):
        series = volumes[vendor]
        sspec = SeasonalSpec(
            harmonics=config.harmonics,
            seasonality_prior_scale=config.seasonality_prior_scale,
        )
        lam = config.changepoint_prior_scale
        if config.tuning_trials > 0:
            holdout_start = series.end_offset - config.holdout_minutes + 1
            if holdout_start <= series.start_offset:
                raise ValidationError(
                    f"vendor {vendor}: history too short to hold out "
                    f"{config.holdout_minutes} minutes for tuning"
                )
            result = tune_hyperparameters(
                series.slice(series.start_offset, holdout_start - 1),
                series.slice(holdout_start, series.end_offset),
                trials=config.tuning_trials,
                rng_seed=np.random.SeedSequence([config.seed, STREAM_TUNING, index]),
                n_changepoints=config.n_changepoints,
            )
            sspec = result.seasonal
            lam = result.trend.changepoint_prior_scale
        changepoints = default_changepoints(
            series.start_offset, series.end_offset, config.n_changepoints
        )
        tspec = TrendSpec(
            changepoints=changepoints[: max(0, len(series) - 1)],
            changepoint_prior_scale=lam,
            history_length=len(series),
        )
        models[vendor] = fit_trend_joint(to_log(series), sspec, tspec, vendor_id=vendor)
    return models


def fit_availability(series: AvailabilitySeries, config: PipelineConfig) -> DesModel:
    """Fit the smoothing model on the trailing fit window."""
    start = max(series.start_offset, series.end_offset - config.des_window)
    return des_fit(
        series.slice(start, series.end_offset),
        trials=config.des_trials,
        rng_seed=seed_for(config.seed, STREAM_DES),
    )


def spawn_series(
    series: VolumeSeries, model: BaselineModel, config: PipelineConfig
) -> MinuteSeries:
    """Problematic-vendor volume over [warmup_start, horizon]:
    actual observations through now, model forecasts afterwards."""
    if series.start_offset > config.warmup_start or series.end_offset < 0:
        raise ValidationError(
            f"volume history must cover [{config.warmup_start}, 0] for the warm-up"
        )
    actual = series.slice(config.warmup_start, 0)
    predicted = baseline_curve(model, np.arange(1, config.horizon + 1))
    return MinuteSeries(
        anchor_epoch_minute=series.anchor_epoch_minute,
        start_offset=config.warmup_start,
        values=np.concatenate([actual.values, predicted]),
    )


def other_total_curve(
    models: dict[str, BaselineModel], problematic_vendor: str, horizon: int
) -> np.ndarray:
    """Summed baseline forecast of every healthy vendor over [1, horizon]."""
    offsets = np.arange(1, horizon + 1)
    total = np.zeros(horizon)
    for vendor in sorted(models):
        if vendor == problematic_vendor:
            continue
        total += baseline_curve(models[vendor], offsets)
    return total


def wiredoff_curve(
    model: WiredOffModel, c_n0_future: np.ndarray, c_other_future: np.ndarray
) -> np.ndarray:
    return np.asarray(predict_wiredoff(model, c_n0_future, c_other_future), dtype=float)


def run_pipeline(
    volumes: dict[str, VolumeSeries],
    availability: dict[str, AvailabilitySeries],
    events: list[AttemptEvent],
    problematic_vendor: str,
    config: PipelineConfig,
    wireoff_history: dict[str, np.ndarray] | None = None,
    delta_override: float | None = None,
) -> PipelineResult:
    """Run every stage and return the recommendation with all artifacts."""
    if problematic_vendor not in volumes:
        raise ValidationError(f"no volume history for vendor {problematic_vendor!r}")
    if problematic_vendor not in availability:
        raise ValidationError(f"no availability data for vendor {problematic_vendor!r}")
    if len(volumes) < 2:
        raise ValidationError("need at least one healthy vendor besides the problematic one")
    if wireoff_history is None and delta_override is None:
        raise ValidationError(
            "need either a historical wire-off window or an explicit migration slope"
        )

    anchor = volumes[problematic_vendor].anchor_epoch_minute
    volumes = {
        vendor: rebase(series, anchor) if series.anchor_epoch_minute != anchor else series
        for vendor, series in volumes.items()
    }
    avail_series = availability[problematic_vendor]
    if avail_series.anchor_epoch_minute != anchor:
        avail_series = rebase(avail_series, anchor)

    baseline_models = fit_baselines(volumes, config)
    n0_model = baseline_models[problematic_vendor]
    des_model = fit_availability(avail_series, config)
    provider = AvailabilityProvider(actuals=avail_series, model=des_model)
    behavior = estimate(events, problematic_vendor)

    spawn = spawn_series(volumes[problematic_vendor], n0_model, config)
    c_other = other_total_curve(baseline_models, problematic_vendor, config.horizon)
    c_other_series = MinuteSeries(anchor_epoch_minute=anchor, start_offset=1, values=c_other)
    wiredon = simulate_wiredon(
        spawn,
        c_other_series,
        provider,
        behavior,
        replications=config.replications,
        master_seed=_int_seed(config.seed, STREAM_SIMULATION),
        threads=config.threads,
    )

    diagnostics = None
    stationarity = None
    if wireoff_history is not None:
        w_off = wireoff_history["w_off"]
        hist_n0 = wireoff_history["c_n0"]
        hist_other = wireoff_history["c_other"]
        wiredoff_model = estimate_slope(w_off, hist_n0, hist_other)
        diagnostics = build_report(
            w_off - hist_other, hist_n0, wiredoff_model.residuals, intercept=False
        )
        if w_off.size >= MIN_ADF_LENGTH:
            stationarity = stationarity_check(migration_ratio(w_off, hist_n0, hist_other))
    else:
        wiredoff_model = WiredOffModel(
            delta=float(delta_override),
            fit_offsets=np.array([], dtype=np.int64),
            residuals=np.array([]),
        )

    c_n0_future = baseline_curve(n0_model, np.arange(1, config.horizon + 1))
    w_off_curve = wiredoff_curve(wiredoff_model, c_n0_future, c_other)
    recommendation = recommend(wiredon.w_on_mean, w_off_curve, anchor_epoch_minute=anchor)

    return PipelineResult(
        problematic_vendor=problematic_vendor,
        baseline_models=baseline_models,
        des_model=des_model,
        behavior=behavior,
        wiredon=wiredon,
        wiredoff_model=wiredoff_model,
        wiredoff=w_off_curve,
        recommendation=recommendation,
        diagnostics=diagnostics,
        stationarity=stationarity,
    )
