"""HTTP/JSON service for interactive incident work.

A session holds one incident's ingested data; fitting, simulating, and
recommending all happen against that session. Fitted artifacts are
immutable — a re-fit bumps the session version, replaces them wholesale,
and invalidates any simulation computed against the old models. Sessions
live in memory, optionally snapshotted to JSON files under a state
directory so a restarted service can serve the same sessions.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .availability import DesModel, des_forecast, des_from_dict, des_to_dict
from .baseline import (
    BaselineModel,
    baseline_curve,
    model_from_dict,
    model_to_dict,
)
from .behavior import (
    AttemptEvent,
    BehaviorDistributions,
    distributions_from_dict,
    distributions_to_dict,
    estimate,
)
from .core import AvailabilitySeries, MinuteSeries, VolumeSeries, rebase
from .dataio import (
    load_availability,
    load_events,
    load_volumes,
    load_wireoff_history,
)
from .decision import Recommendation, recommend, recommendation_to_dict, whatif_difference
from .diagnostics import build_report, report_to_dict
from .errors import SimulationError, WireoffError
from .pipeline import (
    PipelineConfig,
    fit_availability,
    fit_baselines,
    other_total_curve,
    spawn_series,
)
from .simulator import (
    AvailabilityProvider,
    WiredOnForecast,
    simulate_wiredon,
    wiredon_from_dict,
    wiredon_to_dict,
)
from .wiredoff import (
    MIN_ADF_LENGTH,
    WiredOffModel,
    adf_to_dict,
    estimate_slope,
    migration_ratio,
    stationarity_check,
    wiredoff_from_dict,
    wiredoff_to_dict,
)

__all__ = ["create_app"]

API_PREFIX = "/v1"


class SessionCreate(BaseModel):
    volumes_csv: str | None = None
    volumes_path: str | None = None
    availability_csv: str | None = None
    availability_path: str | None = None
    events_csv: str | None = None
    events_path: str | None = None
    wireoff_history_csv: str | None = None
    wireoff_history_path: str | None = None
    problematic_vendor: str | None = None


class FitRequest(BaseModel):
    trials: int = 0
    seed: int = 0
    delta: float | None = None


class SimulateRequest(BaseModel):
    horizon: int = 60
    replications: int = 20
    seed: int  # required: the service never invents entropy


class WhatifRequest(BaseModel):
    wireoff_m: int


@dataclass(frozen=True, eq=False)
class FittedArtifacts:
    """One immutable fit of every model in the session."""

    version: int
    trials: int
    seed: int
    baselines: dict[str, BaselineModel]
    des: DesModel
    behavior: BehaviorDistributions
    wiredoff: WiredOffModel
    diagnostics_doc: dict | None


@dataclass(eq=False)
class Session:
    session_id: str
    created_at: str
    problematic_vendor: str
    volumes: dict[str, VolumeSeries]
    availability: dict[str, AvailabilitySeries]
    events: list[AttemptEvent]
    wireoff_history: dict[str, np.ndarray] | None
    raw_inputs: dict[str, str | None] = field(repr=False, default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    fitted: FittedArtifacts | None = None
    simulation: WiredOnForecast | None = None


def _now() -> str:
    return datetime.now(tz=timezone.utc).isoformat(timespec="seconds")


def _load_csv(text: str | None, path: str | None, loader, what: str):
    """Run a file-based loader against either an inline payload or a path."""
    if (text is None) == (path is None):
        raise HTTPException(
            status_code=400,
            detail=f"provide exactly one of {what}_csv and {what}_path",
        )
    if path is not None:
        target = Path(path)
        if not target.is_file():
            raise HTTPException(status_code=400, detail=f"{what}_path not found: {path}")
        return loader(target)
    with tempfile.TemporaryDirectory() as tmp:
        target = Path(tmp) / f"{what}.csv"
        target.write_text(text, encoding="utf-8")
        return loader(target)


def _infer_vendor(availability: dict[str, AvailabilitySeries], explicit: str | None) -> str:
    if explicit is not None:
        if explicit not in availability:
            raise HTTPException(
                status_code=400,
                detail=f"problematic_vendor {explicit!r} has no availability data",
            )
        return explicit
    if len(availability) == 1:
        return next(iter(availability))
    raise HTTPException(
        status_code=400,
        detail="problematic_vendor is required when availability covers several vendors",
    )


def _fit_session(session: Session, req: FitRequest) -> FittedArtifacts:
    config = PipelineConfig(seed=req.seed, tuning_trials=req.trials)
    anchor = session.volumes[session.problematic_vendor].anchor_epoch_minute
    volumes = {
        vendor: rebase(s, anchor) if s.anchor_epoch_minute != anchor else s
        for vendor, s in session.volumes.items()
    }
    avail = session.availability[session.problematic_vendor]
    if avail.anchor_epoch_minute != anchor:
        avail = rebase(avail, anchor)

    baselines = fit_baselines(volumes, config)
    des = fit_availability(avail, config)
    behavior = estimate(session.events, session.problematic_vendor)

    diagnostics_doc = None
    if session.wireoff_history is not None:
        hist = session.wireoff_history
        wiredoff = estimate_slope(hist["w_off"], hist["c_n0"], hist["c_other"])
        report = build_report(
            hist["w_off"] - hist["c_other"], hist["c_n0"], wiredoff.residuals, intercept=False
        )
        diagnostics_doc = report_to_dict(report)
        if hist["w_off"].size >= MIN_ADF_LENGTH:
            ratio = migration_ratio(hist["w_off"], hist["c_n0"], hist["c_other"])
            diagnostics_doc["stationarity"] = adf_to_dict(stationarity_check(ratio))
    elif req.delta is not None:
        wiredoff = WiredOffModel(
            delta=req.delta,
            fit_offsets=np.array([], dtype=np.int64),
            residuals=np.array([]),
        )
    else:
        raise HTTPException(
            status_code=400,
            detail="session has no wire-off history; pass delta in the fit request",
        )

    version = session.fitted.version + 1 if session.fitted else 1
    return FittedArtifacts(
        version=version,
        trials=req.trials,
        seed=req.seed,
        baselines=baselines,
        des=des,
        behavior=behavior,
        wiredoff=wiredoff,
        diagnostics_doc=diagnostics_doc,
    )


def _fit_summary(session: Session, fitted: FittedArtifacts) -> dict:
    return {
        "session_id": session.session_id,
        "version": fitted.version,
        "problematic_vendor": session.problematic_vendor,
        "baselines": {v: model_to_dict(m) for v, m in fitted.baselines.items()},
        "des": des_to_dict(fitted.des),
        "behavior": distributions_to_dict(fitted.behavior),
        "wiredoff": wiredoff_to_dict(fitted.wiredoff),
    }


def _wiredoff_curve(session: Session, fitted: FittedArtifacts, horizon: int) -> np.ndarray:
    offsets = np.arange(1, horizon + 1)
    c_n0 = baseline_curve(fitted.baselines[session.problematic_vendor], offsets)
    c_other = other_total_curve(fitted.baselines, session.problematic_vendor, horizon)
    return fitted.wiredoff.delta * c_n0 + c_other


def _recommendation(session: Session) -> Recommendation:
    fitted, simulation = session.fitted, session.simulation
    if fitted is None:
        raise HTTPException(status_code=409, detail="fit has not been run for this session")
    if simulation is None:
        raise HTTPException(status_code=409, detail="simulate has not been run for this session")
    w_off = _wiredoff_curve(session, fitted, simulation.horizon)
    return recommend(
        simulation.w_on_mean, w_off, anchor_epoch_minute=simulation.anchor_epoch_minute
    )


# ------------------------------------------------------------- persistence


def _snapshot(session: Session, state_dir: Path | None) -> None:
    if state_dir is None:
        return
    doc = {
        "session_id": session.session_id,
        "created_at": session.created_at,
        "problematic_vendor": session.problematic_vendor,
        "raw_inputs": session.raw_inputs,
        "fitted": None,
        "simulation": None,
    }
    if session.fitted is not None:
        f = session.fitted
        doc["fitted"] = {
            "version": f.version,
            "trials": f.trials,
            "seed": f.seed,
            "baselines": {v: model_to_dict(m) for v, m in f.baselines.items()},
            "des": des_to_dict(f.des),
            "behavior": distributions_to_dict(f.behavior),
            "wiredoff": wiredoff_to_dict(f.wiredoff),
            "diagnostics_doc": f.diagnostics_doc,
        }
    if session.simulation is not None:
        doc["simulation"] = wiredon_to_dict(session.simulation)
    state_dir.mkdir(parents=True, exist_ok=True)
    tmp = state_dir / f".{session.session_id}.tmp"
    tmp.write_text(json.dumps(doc, sort_keys=True), encoding="utf-8")
    os.replace(tmp, state_dir / f"{session.session_id}.json")


def _restore(path: Path) -> Session:
    doc = json.loads(path.read_text(encoding="utf-8"))
    raw = doc["raw_inputs"]
    volumes = _load_csv(raw["volumes"], None, load_volumes, "volumes")
    availability = _load_csv(raw["availability"], None, load_availability, "availability")
    events = _load_csv(raw["events"], None, load_events, "events")
    history = None
    if raw.get("wireoff_history") is not None:
        history = _load_csv(raw["wireoff_history"], None, load_wireoff_history, "wireoff_history")
    session = Session(
        session_id=doc["session_id"],
        created_at=doc["created_at"],
        problematic_vendor=doc["problematic_vendor"],
        volumes=volumes,
        availability=availability,
        events=events,
        wireoff_history=history,
        raw_inputs=raw,
    )
    if doc.get("fitted") is not None:
        f = doc["fitted"]
        session.fitted = FittedArtifacts(
            version=f["version"],
            trials=f["trials"],
            seed=f["seed"],
            baselines={v: model_from_dict(m) for v, m in f["baselines"].items()},
            des=des_from_dict(f["des"]),
            behavior=distributions_from_dict(f["behavior"]),
            wiredoff=wiredoff_from_dict(f["wiredoff"]),
            diagnostics_doc=f.get("diagnostics_doc"),
        )
    if doc.get("simulation") is not None:
        session.simulation = wiredon_from_dict(doc["simulation"])
    return session


def _find_ui_dir() -> Path | None:
    override = os.environ.get("WIREOFF_UI_DIR")
    if override:
        path = Path(override)
        return path if path.is_dir() else None
    bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return bundled if bundled.is_dir() else None


# -------------------------------------------------------------------- app


def create_app(state_dir: str | os.PathLike | None = None) -> FastAPI:
    app = FastAPI(
        title="wireoff",
        description="Vendor wire-off decision support",
        openapi_url=f"{API_PREFIX}/openapi.json",
    )
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    state_path = Path(state_dir) if state_dir is not None else None

    if state_path is not None and state_path.is_dir():
        for snapshot in sorted(state_path.glob("*.json")):
            session = _restore(snapshot)
            sessions[session.session_id] = session

    @app.exception_handler(RequestValidationError)
    async def handle_malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": jsonable_encoder(exc.errors())})

    @app.exception_handler(WireoffError)
    async def handle_domain(request: Request, exc: WireoffError):
        status = 500 if isinstance(exc, SimulationError) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.post(f"{API_PREFIX}/sessions", status_code=201)
    def create_session(body: SessionCreate) -> dict:
        volumes = _load_csv(body.volumes_csv, body.volumes_path, load_volumes, "volumes")
        availability = _load_csv(
            body.availability_csv, body.availability_path, load_availability, "availability"
        )
        events = _load_csv(body.events_csv, body.events_path, load_events, "events")
        history = None
        history_text = body.wireoff_history_csv
        if body.wireoff_history_csv is not None or body.wireoff_history_path is not None:
            if body.wireoff_history_path is not None:
                history_path = Path(body.wireoff_history_path)
                if not history_path.is_file():
                    raise HTTPException(
                        status_code=400,
                        detail=f"wireoff_history_path not found: {history_path}",
                    )
                history_text = history_path.read_text(encoding="utf-8")
            history = _load_csv(history_text, None, load_wireoff_history, "wireoff_history")
        vendor = _infer_vendor(availability, body.problematic_vendor)
        if vendor not in volumes:
            raise HTTPException(
                status_code=400, detail=f"no volume history for vendor {vendor!r}"
            )
        if len(volumes) < 2:
            raise HTTPException(
                status_code=400, detail="need at least one healthy vendor in the volume data"
            )

        def read_raw(text: str | None, path: str | None) -> str | None:
            if text is not None:
                return text
            if path is not None:
                return Path(path).read_text(encoding="utf-8")
            return None

        session = Session(
            session_id=uuid.uuid4().hex[:12],
            created_at=_now(),
            problematic_vendor=vendor,
            volumes=volumes,
            availability=availability,
            events=events,
            wireoff_history=history,
            raw_inputs={
                "volumes": read_raw(body.volumes_csv, body.volumes_path),
                "availability": read_raw(body.availability_csv, body.availability_path),
                "events": read_raw(body.events_csv, body.events_path),
                "wireoff_history": history_text,
            },
        )
        with registry_lock:
            sessions[session.session_id] = session
        _snapshot(session, state_path)
        return {"session_id": session.session_id, "created_at": session.created_at}

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/fit")
    def fit(session_id: str, body: FitRequest) -> dict:
        session = get_session(session_id)
        with session.lock:
            fitted = _fit_session(session, body)
            session.fitted = fitted
            # Models changed: any simulation against the old fit is stale.
            session.simulation = None
            _snapshot(session, state_path)
        return _fit_summary(session, fitted)

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/forecast")
    def forecast(
        session_id: str,
        kind: str = Query(pattern="^(baseline|availability|wiredoff)$"),
        horizon: int = Query(default=60, ge=1),
        vendor: str | None = None,
    ) -> dict:
        session = get_session(session_id)
        fitted = session.fitted
        if fitted is None:
            raise HTTPException(status_code=409, detail="fit has not been run for this session")
        offsets = np.arange(1, horizon + 1)
        if kind == "baseline":
            target = vendor or session.problematic_vendor
            model = fitted.baselines.get(target)
            if model is None:
                raise HTTPException(status_code=400, detail=f"no baseline for vendor {target!r}")
            values = baseline_curve(model, offsets)
        elif kind == "availability":
            values = np.array([des_forecast(fitted.des, int(m)) for m in offsets])
        else:
            values = _wiredoff_curve(session, fitted, horizon)
        return {
            "session_id": session_id,
            "kind": kind,
            "horizon": horizon,
            "offsets": offsets.tolist(),
            "values": values.tolist(),
        }

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/simulate")
    def simulate(session_id: str, body: SimulateRequest) -> dict:
        session = get_session(session_id)
        with session.lock:
            fitted = session.fitted
            if fitted is None:
                raise HTTPException(
                    status_code=409, detail="fit has not been run for this session"
                )
            config = PipelineConfig(
                horizon=body.horizon, replications=body.replications, seed=body.seed
            )
            anchor = session.volumes[session.problematic_vendor].anchor_epoch_minute
            n0_volumes = session.volumes[session.problematic_vendor]
            avail = session.availability[session.problematic_vendor]
            if avail.anchor_epoch_minute != anchor:
                avail = rebase(avail, anchor)
            spawn = spawn_series(
                n0_volumes, fitted.baselines[session.problematic_vendor], config
            )
            c_other = other_total_curve(
                fitted.baselines, session.problematic_vendor, config.horizon
            )
            forecast_obj = simulate_wiredon(
                spawn,
                MinuteSeries(anchor_epoch_minute=anchor, start_offset=1, values=c_other),
                AvailabilityProvider(actuals=avail, model=fitted.des),
                fitted.behavior,
                replications=config.replications,
                master_seed=body.seed,
                threads=config.threads,
            )
            session.simulation = forecast_obj
            _snapshot(session, state_path)
        return wiredon_to_dict(forecast_obj)

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/recommendation")
    def recommendation(session_id: str) -> dict:
        session = get_session(session_id)
        return recommendation_to_dict(_recommendation(session))

    @app.post(f"{API_PREFIX}/sessions/{{session_id}}/whatif")
    def whatif(session_id: str, body: WhatifRequest) -> dict:
        session = get_session(session_id)
        rec = _recommendation(session)
        if not 1 <= body.wireoff_m <= rec.horizon:
            raise HTTPException(
                status_code=400,
                detail=f"wireoff_m must be within [1, {rec.horizon}], got {body.wireoff_m}",
            )
        result = whatif_difference(rec, body.wireoff_m)
        result["wireoff_m"] = body.wireoff_m
        return result

    @app.get(f"{API_PREFIX}/sessions/{{session_id}}/diagnostics")
    def diagnostics(session_id: str) -> dict:
        session = get_session(session_id)
        fitted = session.fitted
        if fitted is None:
            raise HTTPException(status_code=409, detail="fit has not been run for this session")
        if fitted.diagnostics_doc is None:
            raise HTTPException(
                status_code=409,
                detail="no wire-off history in this session, so there is no fit to diagnose",
            )
        return fitted.diagnostics_doc

    ui_dir = _find_ui_dir()
    if ui_dir is not None:
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
