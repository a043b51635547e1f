"""Command-line entry point.

Each subcommand runs one pipeline stage (or the whole thing) against CSV
inputs and writes its artifacts into --output-dir. All randomness flows
from a single --seed through named sub-streams, so reruns with the same
flags produce byte-identical artifacts.

Exit codes: 0 success, 2 bad input (unparseable files, impossible
parameters, missing paths), 1 internal failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .availability import DEFAULT_TRIALS, des_fit, des_forecast, des_to_dict
from .baseline import model_to_dict
from .behavior import distributions_to_dict, estimate
from .decision import ACTION_WIRE_OFF, Recommendation, recommendation_to_dict
from .diagnostics import acf, build_report, report_to_dict
from .dataio import (
    atomic_write_text,
    load_availability,
    load_events,
    load_volumes,
    load_wireoff_history,
    write_acf_csv,
    write_availability,
    write_events,
    write_qq_csv,
    write_volumes,
    write_wiredon_csv,
    write_wireoff_history,
)
from .errors import (
    AlignmentError,
    DomainError,
    EstimationError,
    FitError,
    GapError,
    ParseError,
    TuneError,
    ValidationError,
)
from .pipeline import (
    STREAM_DES,
    PipelineConfig,
    fit_baselines,
    run_pipeline,
    seed_for,
)
from .simulator import DEFAULT_REPLICATIONS
from .synth import crossing_scenario, generate, no_crossing_scenario
from .wiredoff import (
    MIN_ADF_LENGTH,
    adf_to_dict,
    estimate_slope,
    migration_ratio,
    stationarity_check,
    wiredoff_to_dict,
)

__all__ = ["main", "build_parser"]

log = logging.getLogger(__name__)

# Exhaustible input problems: the caller can fix these, so exit 2.
_INPUT_ERRORS = (
    ParseError,
    GapError,
    ValidationError,
    DomainError,
    EstimationError,
    AlignmentError,
    FitError,
    TuneError,
    FileNotFoundError,
    IsADirectoryError,
)

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _configure_logging() -> None:
    name = os.environ.get("WIREOFF_LOG", "warn").lower()
    level = _LOG_LEVELS.get(name)
    if level is None:
        raise ValidationError(
            f"WIREOFF_LOG must be one of {sorted(_LOG_LEVELS)}, got {name!r}"
        )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _write_json(doc: dict, path: Path) -> None:
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _outdir(args) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"input file not found: {p}")
    return p


def _single_vendor(series_by_vendor: dict, flag_value: str | None, what: str) -> str:
    if flag_value is not None:
        if flag_value not in series_by_vendor:
            raise ValidationError(
                f"vendor {flag_value!r} not present in the {what} data "
                f"(has {sorted(series_by_vendor)})"
            )
        return flag_value
    if len(series_by_vendor) == 1:
        return next(iter(series_by_vendor))
    raise ValidationError(
        f"--vendor is required when the {what} data covers several vendors "
        f"({sorted(series_by_vendor)})"
    )


def _human_line(rec: Recommendation) -> str:
    if rec.action != ACTION_WIRE_OFF:
        return "KEEP WIRED ON"
    stamp = datetime.fromtimestamp(
        (rec.anchor_epoch_minute + rec.m_star) * 60, tz=timezone.utc
    ).strftime("%Y-%m-%dT%H:%MZ")
    return f"WIRE OFF at {stamp} (m*={rec.m_star})"


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        horizon=args.horizon,
        replications=getattr(args, "replications", DEFAULT_REPLICATIONS),
        seed=args.seed,
        threads=getattr(args, "threads", 1),
        tuning_trials=getattr(args, "trials", 0),
    )


def _load_history(args) -> dict | None:
    """Wire-off history: explicit flag, or the conventional file next to
    the volumes CSV (where `synth` puts it)."""
    if getattr(args, "history", None):
        return load_wireoff_history(_require_file(args.history))
    if getattr(args, "delta", None) is not None:
        return None
    conventional = Path(args.volumes).parent / "wireoff_history.csv"
    if conventional.is_file():
        return load_wireoff_history(conventional)
    raise FileNotFoundError(
        f"no wire-off history found at {conventional}; pass --history or --delta"
    )


# ---------------------------------------------------------------- handlers


def _cmd_synth(args) -> int:
    out = _outdir(args)
    preset = {"crossing": crossing_scenario, "no-crossing": no_crossing_scenario}[args.scenario]
    scenario = preset()
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    dataset = generate(scenario)
    write_volumes(dataset.volumes, out / "volumes.csv")
    write_availability(dataset.availability, out / "availability.csv")
    write_events(dataset.events, out / "events.csv")
    hist = dataset.wireoff_history
    write_wireoff_history(
        hist["offsets"], hist["w_off"], hist["c_n0"], hist["c_other"],
        out / "wireoff_history.csv",
    )
    _write_json(
        {
            "name": scenario.name,
            "problematic_vendor": scenario.problematic_vendor,
            "vendors": [v.vendor_id for v in scenario.vendors],
            "horizon": scenario.horizon,
            "seed": scenario.seed,
            "wireoff_delta": scenario.wireoff_delta,
            "actual_wireoff_m": scenario.actual_wireoff_m,
            "anchor_epoch_minute": scenario.anchor_epoch_minute,
        },
        out / "scenario.json",
    )
    print(f"wrote scenario {scenario.name!r} to {out}")
    return 0


def _cmd_fit_baseline(args) -> int:
    out = _outdir(args)
    volumes = load_volumes(_require_file(args.volumes))
    if args.vendor is not None:
        if args.vendor not in volumes:
            raise ValidationError(f"vendor {args.vendor!r} not in {sorted(volumes)}")
        volumes = {args.vendor: volumes[args.vendor]}
    config = PipelineConfig(seed=args.seed, tuning_trials=args.trials)
    models = fit_baselines(volumes, config)
    for vendor, model in models.items():
        _write_json(model_to_dict(model), out / f"baseline_{vendor}.json")
    print(json.dumps({v: out.joinpath(f"baseline_{v}.json").name for v in sorted(models)},
                     sort_keys=True))
    return 0


def _cmd_forecast_availability(args) -> int:
    out = _outdir(args)
    availability = load_availability(_require_file(args.availability))
    vendor = _single_vendor(availability, args.vendor, "availability")
    series = availability[vendor]
    start = max(series.start_offset, series.end_offset - args.window)
    model = des_fit(
        series.slice(start, series.end_offset),
        trials=args.trials,
        rng_seed=seed_for(args.seed, STREAM_DES),
    )
    _write_json(des_to_dict(model), out / "des_model.json")
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["offset_m", "availability"])
    for m in range(1, args.horizon + 1):
        writer.writerow([m, repr(des_forecast(model, m))])
    atomic_write_text(out / "availability_forecast.csv", buffer.getvalue())
    print(json.dumps(des_to_dict(model), sort_keys=True))
    return 0


def _cmd_estimate_behavior(args) -> int:
    out = _outdir(args)
    events = load_events(_require_file(args.events))
    dist = estimate(events, args.vendor)
    doc = distributions_to_dict(dist)
    _write_json(doc, out / "behavior.json")
    print(json.dumps(doc, sort_keys=True))
    return 0


def _cmd_simulate_wiredon(args) -> int:
    out = _outdir(args)
    volumes = load_volumes(_require_file(args.volumes))
    availability = load_availability(_require_file(args.availability))
    events = load_events(_require_file(args.events))
    vendor = _single_vendor(availability, args.vendor, "availability")
    # The full pipeline needs a wired-off input; a unit slope is inert here
    # because this subcommand only reports the wired-on side.
    result = run_pipeline(
        volumes, availability, events, vendor, _pipeline_config(args), delta_override=1.0
    )
    write_wiredon_csv(result.wiredon, out / "wiredon.csv")
    forecast = result.wiredon
    print(json.dumps(
        {
            "horizon": forecast.horizon,
            "replications": forecast.replications,
            "spawned": int(np.sum(forecast.ledger.spawned)),
            "w_on_total": float(np.sum(forecast.w_on_mean)),
        },
        sort_keys=True,
    ))
    return 0


def _cmd_fit_wiredoff(args) -> int:
    out = _outdir(args)
    hist = load_wireoff_history(_require_file(args.history))
    model = estimate_slope(hist["w_off"], hist["c_n0"], hist["c_other"])
    doc = wiredoff_to_dict(model)
    _write_json(doc, out / "wiredoff.json")
    print(json.dumps({"delta": model.delta}, sort_keys=True))
    return 0


def _cmd_diagnose(args) -> int:
    out = _outdir(args)
    hist = load_wireoff_history(_require_file(args.history))
    model = estimate_slope(hist["w_off"], hist["c_n0"], hist["c_other"])
    report = build_report(
        hist["w_off"] - hist["c_other"], hist["c_n0"], model.residuals, intercept=False
    )
    doc = report_to_dict(report)
    if hist["w_off"].size >= MIN_ADF_LENGTH:
        ratio = migration_ratio(hist["w_off"], hist["c_n0"], hist["c_other"])
        doc["stationarity"] = adf_to_dict(stationarity_check(ratio))
    _write_json(doc, out / "diagnostics.json")
    write_qq_csv(report, out / "qq.csv")
    lags = min(40, model.residuals.size - 1)
    write_acf_csv(acf(model.residuals, lags), report.acf_ci_halfwidth, out / "acf.csv")
    print(json.dumps(doc, sort_keys=True))
    return 0


def _cmd_recommend(args) -> int:
    out = _outdir(args)
    volumes = load_volumes(_require_file(args.volumes))
    availability = load_availability(_require_file(args.availability))
    events = load_events(_require_file(args.events))
    vendor = _single_vendor(availability, args.vendor, "availability")
    history = _load_history(args)
    result = run_pipeline(
        volumes,
        availability,
        events,
        vendor,
        _pipeline_config(args),
        wireoff_history=history,
        delta_override=args.delta,
    )
    doc = recommendation_to_dict(result.recommendation)
    _write_json(doc, out / "recommendation.json")
    write_wiredon_csv(result.wiredon, out / "wiredon.csv")
    _write_json(wiredoff_to_dict(result.wiredoff_model), out / "wiredoff.json")
    if result.diagnostics is not None:
        diag = report_to_dict(result.diagnostics)
        if result.stationarity is not None:
            diag["stationarity"] = adf_to_dict(result.stationarity)
        _write_json(diag, out / "diagnostics.json")
    print(json.dumps(doc, sort_keys=True))
    print(_human_line(result.recommendation))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(state_dir=args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wireoff",
        description="Vendor wire-off decision support: forecast, simulate, recommend.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, seed_default: int | None = 0):
        p.add_argument("--output-dir", default="./out", help="artifact directory")
        p.add_argument("--seed", type=int, default=seed_default,
                       help="master seed for every random sub-stream")

    p = sub.add_parser("synth", help="write a bundled synthetic incident to disk")
    p.add_argument("--scenario", choices=["crossing", "no-crossing"], default="crossing")
    add_common(p, seed_default=None)
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("fit-baseline", help="fit per-vendor baseline volume models")
    p.add_argument("--volumes", required=True)
    p.add_argument("--vendor", default=None, help="fit only this vendor")
    p.add_argument("--trials", type=int, default=0, help="hyperparameter search budget")
    add_common(p)
    p.set_defaults(handler=_cmd_fit_baseline)

    p = sub.add_parser("forecast-availability", help="fit smoothing model and forecast")
    p.add_argument("--availability", required=True)
    p.add_argument("--vendor", default=None)
    p.add_argument("--horizon", type=int, default=60)
    p.add_argument("--window", type=int, default=30, help="trailing fit window, minutes")
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    add_common(p)
    p.set_defaults(handler=_cmd_forecast_availability)

    p = sub.add_parser("estimate-behavior", help="estimate retry/switch/delay distributions")
    p.add_argument("--events", required=True)
    p.add_argument("--vendor", required=True, help="problematic vendor id")
    add_common(p)
    p.set_defaults(handler=_cmd_estimate_behavior)

    p = sub.add_parser("simulate-wiredon", help="Monte Carlo wired-on volume forecast")
    p.add_argument("--volumes", required=True)
    p.add_argument("--availability", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--vendor", default=None)
    p.add_argument("--horizon", type=int, default=60)
    p.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--trials", type=int, default=0, help="baseline hyperparameter search budget")
    add_common(p)
    p.set_defaults(handler=_cmd_simulate_wiredon)

    p = sub.add_parser("fit-wiredoff", help="fit the migration slope on a wire-off window")
    p.add_argument("--history", required=True)
    add_common(p)
    p.set_defaults(handler=_cmd_fit_wiredoff)

    p = sub.add_parser("diagnose", help="regression diagnostics for the migration fit")
    p.add_argument("--history", required=True)
    add_common(p)
    p.set_defaults(handler=_cmd_diagnose)

    p = sub.add_parser("recommend", help="end-to-end wire-off recommendation")
    p.add_argument("--volumes", required=True)
    p.add_argument("--availability", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--history", default=None,
                   help="wire-off window CSV (default: wireoff_history.csv next to --volumes)")
    p.add_argument("--delta", type=float, default=None,
                   help="skip the wired-off fit and use this migration slope")
    p.add_argument("--vendor", default=None)
    p.add_argument("--horizon", type=int, default=60)
    p.add_argument("--replications", type=int, default=DEFAULT_REPLICATIONS)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--trials", type=int, default=0, help="baseline hyperparameter search budget")
    add_common(p)
    p.set_defaults(handler=_cmd_recommend)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--state-dir", default=None, help="JSON session snapshots directory")
    p.set_defaults(handler=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        _configure_logging()
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # argparse prints its own usage message
            return int(exc.code or 0)
        return args.handler(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # noqa: BLE001 — last-resort boundary for exit code 1
        log.exception("internal error")
        return 1


if __name__ == "__main__":
    sys.exit(main())
