import dataclasses
import time

import pytest

from wireoff.behavior import BehaviorDistributions
from wireoff.dataio import (
    write_availability,
    write_events,
    write_volumes,
    write_wireoff_history,
)
from wireoff.pipeline import PipelineConfig, run_pipeline
from wireoff.synth import crossing_scenario, generate


@pytest.fixture(scope="session")
def crossing_dataset():
    return generate(crossing_scenario())


@pytest.fixture(scope="session")
def crossing_run(crossing_dataset):
    """Full engine run on the bundled crossing incident, with wall time."""
    ds = crossing_dataset
    started = time.perf_counter()
    result = run_pipeline(
        ds.volumes,
        ds.availability,
        ds.events,
        ds.scenario.problematic_vendor,
        PipelineConfig(),
        wireoff_history=ds.wireoff_history,
    )
    elapsed = time.perf_counter() - started
    return result, elapsed


@pytest.fixture(scope="session")
def reduced_dataset():
    """Crossing incident with one day of history: fast enough for CLI runs."""
    return generate(dataclasses.replace(crossing_scenario(seed=7), history_minutes=1440))


def write_dataset_dir(dataset, directory):
    directory.mkdir(parents=True, exist_ok=True)
    write_volumes(dataset.volumes, directory / "volumes.csv")
    write_availability(dataset.availability, directory / "availability.csv")
    write_events(dataset.events, directory / "events.csv")
    hist = dataset.wireoff_history
    write_wireoff_history(
        hist["offsets"], hist["w_off"], hist["c_n0"], hist["c_other"],
        directory / "wireoff_history.csv",
    )
    return directory


@pytest.fixture(scope="session")
def reduced_dataset_dir(reduced_dataset, tmp_path_factory):
    return write_dataset_dir(reduced_dataset, tmp_path_factory.mktemp("incident"))


@pytest.fixture
def behavior_dist():
    return BehaviorDistributions(
        retry_p=(0.7, 0.5),
        switch_p=(0.3, 0.6),
        interattempt_seconds=[30, 90, 150],
        interattempt_pmf=[0.5, 0.3, 0.2],
    )
