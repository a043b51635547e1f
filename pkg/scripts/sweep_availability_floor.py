"""How far does availability have to fall before wiring off wins?

Regenerates the bundled incident with the availability endpoint swept
from a mild dip to a severe outage, runs the engine at each level, and
tabulates the recommended minute. The decline is linear from the same
starting shoulder, so lower floors also mean steeper declines — the
engine should flip from "keep wired on" to progressively earlier
wire-off minutes as the floor drops.
"""

import argparse
import dataclasses
import time

from wireoff.decision import ACTION_WIRE_OFF, whatif_difference
from wireoff.pipeline import PipelineConfig, run_pipeline
from wireoff.synth import AvailabilityProfile, crossing_scenario, generate


def run_one(floor, args):
    scenario = crossing_scenario(seed=args.seed)
    scenario = dataclasses.replace(
        scenario,
        history_minutes=args.history_minutes,
        availability_profile=AvailabilityProfile(
            points=((-120, 1.0), (-50, 1.0), (0, floor))
        ),
    )
    dataset = generate(scenario)
    config = PipelineConfig(
        horizon=args.horizon, replications=args.replications, seed=args.seed
    )
    result = run_pipeline(
        dataset.volumes,
        dataset.availability,
        dataset.events,
        scenario.problematic_vendor,
        config,
        wireoff_history=dataset.wireoff_history,
    )
    return result.recommendation


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--floors", type=float, nargs="+",
                        default=[0.95, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4])
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--horizon", type=int, default=45)
    parser.add_argument("--replications", type=int, default=10)
    parser.add_argument("--history-minutes", type=int, default=1440)
    args = parser.parse_args()

    print(f"{'floor':>6}  {'recommendation':<20}  {'gain at m*':>11}")
    started = time.perf_counter()
    for floor in args.floors:
        rec = run_one(floor, args)
        if rec.action == ACTION_WIRE_OFF:
            verdict = f"wire off at m*={rec.m_star}"
            gain = f"{whatif_difference(rec, rec.m_star)['difference']:+.0f}"
        else:
            verdict, gain = "keep wired on", "-"
        print(f"{floor:>6.2f}  {verdict:<20}  {gain:>11}")
    print(f"({len(args.floors)} runs in {time.perf_counter() - started:.1f}s)")


if __name__ == "__main__":
    main()
