#!/usr/bin/env python3
"""Record service responses used as frontend test fixtures.

Builds the two bundled synthetic scenarios, drives the HTTP app through a
real request/response cycle, and freezes the JSON bodies under
tests/fixtures/<scenario>/.  Session ids are patched to a counter so
re-recording produces byte-identical files.

Usage: python3 scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
import uuid
from pathlib import Path
from unittest import mock

from fastapi.testclient import TestClient

from wireoff.service import create_app

FIXTURES = Path(__file__).resolve().parents[1] / "tests" / "fixtures"

HORIZON = 45
REPLICATIONS = 20
SIM_SEED = 7


def _dump(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _fake_uuid_factory():
    counter = iter(range(1, 1000))

    def fake_uuid4():
        # the service keeps hex[:12], i.e. the top 12 nibbles
        return uuid.UUID(int=next(counter) << 80)

    return fake_uuid4


def record_scenario(client: TestClient, name: str, scenario: str, seed: int) -> None:
    out = FIXTURES / name
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "wireoff.cli", "synth",
             "--scenario", scenario, "--output-dir", tmp, "--seed", str(seed)],
            check=True,
            capture_output=True,
        )
        created = client.post(
            "/v1/sessions",
            json={
                "volumes_path": f"{tmp}/volumes.csv",
                "availability_path": f"{tmp}/availability.csv",
                "events_path": f"{tmp}/events.csv",
                "wireoff_history_path": f"{tmp}/wireoff_history.csv",
            },
        )
    created.raise_for_status()
    _dump(out / "session.json", created.json())
    sid = created.json()["session_id"]

    fit = client.post(f"/v1/sessions/{sid}/fit", json={})
    fit.raise_for_status()
    _dump(out / "fit.json", fit.json())

    sim = client.post(
        f"/v1/sessions/{sid}/simulate",
        json={"horizon": HORIZON, "replications": REPLICATIONS, "seed": SIM_SEED},
    )
    sim.raise_for_status()
    _dump(out / "simulate.json", sim.json())

    rec = client.get(f"/v1/sessions/{sid}/recommendation")
    rec.raise_for_status()
    _dump(out / "recommendation.json", rec.json())

    for label, params in [
        ("forecast_baseline", {"kind": "baseline", "horizon": HORIZON}),
        ("forecast_baseline_other", {"kind": "baseline", "horizon": HORIZON, "vendor": "pay-b"}),
        ("forecast_wiredoff", {"kind": "wiredoff", "horizon": HORIZON}),
    ]:
        resp = client.get(f"/v1/sessions/{sid}/forecast", params=params)
        resp.raise_for_status()
        _dump(out / f"{label}.json", resp.json())

    whatif = {}
    for m in range(1, HORIZON + 1):
        resp = client.post(f"/v1/sessions/{sid}/whatif", json={"wireoff_m": m})
        resp.raise_for_status()
        whatif[str(m)] = resp.json()
    _dump(out / "whatif.json", whatif)

    # error bodies the UI must surface, recorded rather than hand-written
    errors = {}
    for label, resp in [
        ("whatif_out_of_range", client.post(f"/v1/sessions/{sid}/whatif", json={"wireoff_m": HORIZON + 55})),
        ("unknown_session", client.get("/v1/sessions/eeeeeeeeeeee/recommendation")),
        ("simulate_missing_seed", client.post(f"/v1/sessions/{sid}/simulate", json={"horizon": 10, "replications": 2})),
    ]:
        errors[label] = {"status": resp.status_code, "body": resp.json()}
    _dump(out / "errors.json", errors)


def main() -> None:
    with mock.patch("wireoff.service.uuid.uuid4", _fake_uuid_factory()):
        client = TestClient(create_app(), raise_server_exceptions=False)
        record_scenario(client, "crossing", "crossing", seed=3)
        record_scenario(client, "no_crossing", "no-crossing", seed=3)
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
