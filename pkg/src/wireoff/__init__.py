"""Decision support for wiring off a degraded vendor.

Forecasts customer-experience volume with the problematic vendor enabled
(Monte Carlo over retry/switch/abandon behavior against an availability
forecast) and disabled (migration-slope model), then recommends the
earliest wire-off minute from which disabling wins for the rest of the
horizon.
"""

from .availability import DesModel, des_fit, des_forecast, des_run, rolling_validate
from .baseline import (
    BaselineModel,
    SeasonalSpec,
    TrendSpec,
    TuningResult,
    baseline_curve,
    fit_seasonal,
    fit_trend_joint,
    predict_baseline,
    sample_future_changepoints,
    tune_hyperparameters,
)
from .behavior import AttemptEvent, BehaviorDistributions, estimate
from .core import (
    AvailabilitySeries,
    MinuteSeries,
    TimeIndex,
    VolumeSeries,
    align,
    rebase,
    to_log,
)
from .decision import (
    ACTION_KEEP_WIRED_ON,
    ACTION_WIRE_OFF,
    Recommendation,
    lead_time,
    recommend,
    whatif_difference,
)
from .diagnostics import DiagnosticsReport, build_report
from .errors import (
    AlignmentError,
    DomainError,
    EstimationError,
    FitError,
    GapError,
    ParseError,
    SimulationError,
    TuneError,
    ValidationError,
    WireoffError,
)
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .simulator import (
    AvailabilityProvider,
    CustomerOutcome,
    Outcome,
    WiredOnForecast,
    simulate_customer,
    simulate_wiredon,
)
from .wiredoff import (
    AdfResult,
    WiredOffModel,
    estimate_slope,
    migration_ratio,
    predict_wiredoff,
    stationarity_check,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "TimeIndex",
    "MinuteSeries",
    "VolumeSeries",
    "AvailabilitySeries",
    "align",
    "rebase",
    "to_log",
    # baseline
    "BaselineModel",
    "SeasonalSpec",
    "TrendSpec",
    "TuningResult",
    "fit_seasonal",
    "fit_trend_joint",
    "baseline_curve",
    "predict_baseline",
    "sample_future_changepoints",
    "tune_hyperparameters",
    # availability
    "DesModel",
    "des_run",
    "des_fit",
    "des_forecast",
    "rolling_validate",
    # behavior
    "AttemptEvent",
    "BehaviorDistributions",
    "estimate",
    # simulator
    "Outcome",
    "CustomerOutcome",
    "AvailabilityProvider",
    "WiredOnForecast",
    "simulate_customer",
    "simulate_wiredon",
    # wired-off
    "WiredOffModel",
    "AdfResult",
    "estimate_slope",
    "predict_wiredoff",
    "migration_ratio",
    "stationarity_check",
    # decision
    "Recommendation",
    "ACTION_WIRE_OFF",
    "ACTION_KEEP_WIRED_ON",
    "recommend",
    "lead_time",
    "whatif_difference",
    # diagnostics
    "DiagnosticsReport",
    "build_report",
    # pipeline
    "PipelineConfig",
    "PipelineResult",
    "run_pipeline",
    # errors
    "WireoffError",
    "DomainError",
    "AlignmentError",
    "FitError",
    "TuneError",
    "EstimationError",
    "SimulationError",
    "ValidationError",
    "ParseError",
    "GapError",
]
