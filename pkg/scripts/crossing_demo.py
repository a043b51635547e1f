"""Run the decision engine end to end on a bundled synthetic incident.

Generates the incident, fits every model, simulates the wired-on path,
and prints the recommendation next to the scenario's scripted wire-off
so the lead time is visible. Pass --out to also dump the input CSVs for
replaying the same incident through the CLI.
"""

import argparse
import dataclasses
import time
from pathlib import Path

import numpy as np

from wireoff.dataio import (
    write_availability,
    write_events,
    write_volumes,
    write_wireoff_history,
)
from wireoff.decision import ACTION_WIRE_OFF, lead_time, whatif_difference
from wireoff.pipeline import PipelineConfig, run_pipeline
from wireoff.synth import crossing_scenario, generate, no_crossing_scenario

PRESETS = {"crossing": crossing_scenario, "no-crossing": no_crossing_scenario}


def margin_strip(margin, width=60):
    """One character per minute: '+' where wiring off wins, '-' where it loses."""
    return "".join("+" if v > 0 else "-" for v in margin[:width])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", choices=sorted(PRESETS), default="crossing")
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--history-minutes", type=int, default=None,
                        help="shrink the volume history for a faster run")
    parser.add_argument("--replications", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--out", type=Path, default=None,
                        help="directory for the generated incident CSVs")
    args = parser.parse_args()

    scenario = PRESETS[args.scenario](seed=args.seed)
    if args.history_minutes is not None:
        scenario = dataclasses.replace(scenario, history_minutes=args.history_minutes)
    dataset = generate(scenario)

    overrides = {
        k: v
        for k, v in {"replications": args.replications, "threads": args.threads}.items()
        if v is not None
    }
    config = dataclasses.replace(PipelineConfig(), **overrides)

    started = time.perf_counter()
    result = run_pipeline(
        dataset.volumes,
        dataset.availability,
        dataset.events,
        scenario.problematic_vendor,
        config,
        wireoff_history=dataset.wireoff_history,
    )
    elapsed = time.perf_counter() - started

    truth = scenario.behavior
    print(f"scenario          {scenario.name} (seed {scenario.seed})")
    print(f"engine run        {elapsed:.2f}s, {config.replications} replications, "
          f"horizon {config.horizon}")
    print(f"retry p(k=1)      {result.behavior.retry_p[0]:.3f}  (truth {truth.retry_p[0]:.3f})")
    print(f"switch p(k=1)     {result.behavior.switch_p[0]:.3f}  (truth {truth.switch_p[0]:.3f})")
    print(f"migration slope   {result.wiredoff_model.delta:.3f}  "
          f"(truth {scenario.wireoff_delta:.3f})")
    if result.stationarity is not None:
        s = result.stationarity
        print(f"migration ratio   ADF {s.statistic:.2f} -> "
              f"{'stationary' if s.stationary else 'NOT stationary'}")

    rec = result.recommendation
    print(f"margin by minute  {margin_strip(rec.margin_curve)}")
    if rec.action == ACTION_WIRE_OFF:
        gain = whatif_difference(rec, rec.m_star)["difference"]
        print(f"recommendation    wire off at minute {rec.m_star} "
              f"(+{gain:.0f} completed experiences vs staying wired on)")
        if scenario.actual_wireoff_m is not None:
            print(f"scripted wire-off minute {scenario.actual_wireoff_m} -> "
                  f"lead time {lead_time(rec, scenario.actual_wireoff_m)} minutes")
    else:
        print("recommendation    keep wired on (no minute has an all-positive margin tail)")

    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        write_volumes(dataset.volumes, args.out / "volumes.csv")
        write_availability(dataset.availability, args.out / "availability.csv")
        write_events(dataset.events, args.out / "events.csv")
        hist = dataset.wireoff_history
        write_wireoff_history(hist["offsets"], hist["w_off"], hist["c_n0"],
                              hist["c_other"], args.out / "wireoff_history.csv")
        print(f"incident CSVs written to {args.out}")

    np.set_printoptions(precision=1, suppress=True)
    print(f"wired-on  curve   {rec.wiredon_curve[:10]} ...")
    print(f"wired-off curve   {rec.wiredoff_curve[:10]} ...")


if __name__ == "__main__":
    main()
