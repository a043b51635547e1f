"""Monte Carlo forecast of wired-on volume.

Every minute of the horizon (plus a warm-up window before it, so delayed
retries from earlier attempts land inside the horizon) spawns one simulated
customer per whole unit of the problematic vendor's baseline volume. Each
customer walks the retry/switch/abandon decision process against the
availability curve; outcomes are binned per minute and averaged across
replications.

Determinism contract: every customer gets its own counter-based random
stream keyed by (master seed, replication, spawn minute, customer index),
so results are identical regardless of thread count or execution order.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .availability import DesModel, des_forecast
from .behavior import (
    BehaviorDistributions,
    sample_interattempt,
)
from .core import AvailabilitySeries, MinuteSeries
from .errors import AlignmentError, DomainError, SimulationError

__all__ = [
    "Outcome",
    "CustomerOutcome",
    "AvailabilityProvider",
    "WiredOnForecast",
    "ConservationLedger",
    "customer_stream",
    "simulate_customer",
    "simulate_wiredon",
    "wiredon_to_dict",
    "wiredon_from_dict",
    "RETRY_CAP",
    "DEFAULT_WARMUP_START",
    "DEFAULT_REPLICATIONS",
]

RETRY_CAP = 15
DEFAULT_WARMUP_START = -10
DEFAULT_REPLICATIONS = 20

_MASK64 = (1 << 64) - 1
_MAX_REPLICATIONS = 1 << 16
_MAX_MINUTES = 1 << 24
_MAX_CUSTOMERS_PER_MINUTE = (1 << 24) - 1
# Reserved customer-index slot for the stochastic-rounding spawn decision.
_SPAWN_SLOT = (1 << 24) - 1


class Outcome(enum.Enum):
    SUCCESS_PROBLEMATIC = "success_problematic"
    SUCCESS_OTHER = "success_other"
    ABANDONED = "abandoned"


@dataclass(frozen=True)
class CustomerOutcome:
    status: Outcome
    decision_offset: int


@dataclass(frozen=True)
class AvailabilityProvider:
    """Availability lookup: actual observations up to now, forecast after.

    Offsets outside the actual window (possible if the warm-up reaches
    further back than the recorded availability) reuse the nearest edge
    observation.
    """

    actuals: AvailabilitySeries
    model: DesModel

    def availability_at(self, minute: int) -> float:
        if minute > 0:
            return des_forecast(self.model, minute)
        if minute < self.actuals.start_offset:
            return float(self.actuals.values[0])
        if minute > self.actuals.end_offset:
            return float(self.actuals.values[-1])
        return self.actuals.value_at(minute)


def customer_stream(
    master_seed: int, replication: int, minute_idx: int, customer_idx: int
) -> np.random.Generator:
    """Counter-based random stream unique to one simulated customer."""
    if not 0 <= replication < _MAX_REPLICATIONS:
        raise SimulationError(f"replication index {replication} out of range")
    if not 0 <= minute_idx < _MAX_MINUTES:
        raise SimulationError(f"minute index {minute_idx} out of range")
    if not 0 <= customer_idx <= _SPAWN_SLOT:
        raise SimulationError(f"customer index {customer_idx} out of range")
    composite = (replication << 48) | (minute_idx << 24) | customer_idx
    key = np.array([master_seed & _MASK64, composite], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate_customer(
    start_m: float,
    provider: AvailabilityProvider,
    dist: BehaviorDistributions,
    rng: np.random.Generator,
) -> CustomerOutcome:
    """Walk one customer through the retry/switch/abandon decision process.

    Each attempt with the problematic vendor succeeds with the current
    availability. On the k-th consecutive failure the customer retries
    with probability retry_prob(k) — but never beyond the hard cap — waits
    an interattempt delay, and then switches to another vendor (an
    immediate success) with probability switch_prob(k); otherwise the loop
    re-attempts the problematic vendor at the advanced clock.
    """
    m = float(start_m)
    k = 0
    while True:
        if rng.random() < provider.availability_at(math.floor(m)):
            return CustomerOutcome(Outcome.SUCCESS_PROBLEMATIC, math.floor(m))
        k += 1
        wants_retry = rng.random() < dist.retry_prob(k)
        if not wants_retry or k == RETRY_CAP:
            return CustomerOutcome(Outcome.ABANDONED, math.floor(m))
        m += sample_interattempt(dist, rng) / 60.0
        if rng.random() < dist.switch_prob(k):
            return CustomerOutcome(Outcome.SUCCESS_OTHER, math.floor(m))


@dataclass(frozen=True, eq=False)
class ConservationLedger:
    """Per-replication accounting of every spawned customer."""

    spawned: np.ndarray = field(repr=False)
    resolved_in_horizon: np.ndarray = field(repr=False)
    in_flight: np.ndarray = field(repr=False)  # decision landed past the horizon
    dropped: np.ndarray = field(repr=False)  # decision landed before minute 1
    success_problematic_total: np.ndarray = field(repr=False)
    success_other_total: np.ndarray = field(repr=False)
    abandoned_total: np.ndarray = field(repr=False)

    def balanced(self) -> bool:
        lhs = self.resolved_in_horizon + self.in_flight + self.dropped
        by_status = (
            self.success_problematic_total
            + self.success_other_total
            + self.abandoned_total
        )
        return bool(np.all(lhs == self.spawned) and np.all(by_status == self.spawned))


@dataclass(frozen=True, eq=False)
class WiredOnForecast:
    """Per-minute wired-on volume forecast over offsets [1, horizon]."""

    anchor_epoch_minute: int
    horizon: int
    replications: int
    master_seed: int
    c_other: np.ndarray = field(repr=False)
    a_problematic_reps: np.ndarray = field(repr=False)  # (replications, horizon) ints
    a_other_reps: np.ndarray = field(repr=False)
    abandoned_reps: np.ndarray = field(repr=False)
    a_problematic_mean: np.ndarray = field(repr=False)
    a_other_mean: np.ndarray = field(repr=False)
    abandoned_mean: np.ndarray = field(repr=False)
    w_on_mean: np.ndarray = field(repr=False)
    w_on_p10: np.ndarray = field(repr=False)
    w_on_p90: np.ndarray = field(repr=False)
    ledger: ConservationLedger

    def offsets(self) -> np.ndarray:
        return np.arange(1, self.horizon + 1)


def _simulate_cohort(
    rep: int,
    minute_offset: int,
    minute_idx: int,
    base_count: int,
    fraction: float,
    provider: AvailabilityProvider,
    dist: BehaviorDistributions,
    master_seed: int,
    horizon: int,
    stochastic_rounding: bool,
):
    """Simulate every customer spawned in one (replication, minute) cell."""
    count = base_count
    if stochastic_rounding and fraction > 0.0:
        spawn_rng = customer_stream(master_seed, rep, minute_idx, _SPAWN_SLOT)
        if spawn_rng.random() < fraction:
            count += 1
    if count > _MAX_CUSTOMERS_PER_MINUTE:
        raise SimulationError(f"{count} customers in one minute exceeds the stream keyspace")
    binned = np.zeros((3, horizon), dtype=np.int64)
    in_flight = dropped = 0
    totals = np.zeros(3, dtype=np.int64)
    status_row = {
        Outcome.SUCCESS_PROBLEMATIC: 0,
        Outcome.SUCCESS_OTHER: 1,
        Outcome.ABANDONED: 2,
    }
    for customer_idx in range(count):
        rng = customer_stream(master_seed, rep, minute_idx, customer_idx)
        outcome = simulate_customer(float(minute_offset), provider, dist, rng)
        row = status_row[outcome.status]
        totals[row] += 1
        if outcome.decision_offset < 1:
            dropped += 1
        elif outcome.decision_offset > horizon:
            in_flight += 1
        else:
            binned[row, outcome.decision_offset - 1] += 1
    return count, binned, in_flight, dropped, totals


def simulate_wiredon(
    baseline_problematic: MinuteSeries,
    baseline_other: MinuteSeries,
    provider: AvailabilityProvider,
    dist: BehaviorDistributions,
    replications: int = DEFAULT_REPLICATIONS,
    master_seed: int = 0,
    *,
    threads: int = 1,
    stochastic_rounding: bool = False,
) -> WiredOnForecast:
    """Aggregate customer simulations into the wired-on volume forecast.

    `baseline_problematic` must cover [warmup_start, horizon] and supplies
    the spawn counts (floored to whole customers); callers splice actual
    volumes for past minutes with forecasts for future ones. The wired-on
    curve is successes-with-problematic-vendor plus simulated switch
    successes plus the other-vendor baseline. Outcomes landing before
    minute 1 or past the horizon are excluded from the curves but kept in
    the conservation ledger.
    """
    if replications < 1:
        raise DomainError(f"replications must be >= 1, got {replications}")
    if replications > _MAX_REPLICATIONS:
        raise DomainError(f"replications capped at {_MAX_REPLICATIONS}")
    if threads < 1:
        raise DomainError(f"threads must be >= 1, got {threads}")
    if baseline_problematic.anchor_epoch_minute != baseline_other.anchor_epoch_minute:
        raise AlignmentError("baseline series have different anchors")
    warmup_start = baseline_problematic.start_offset
    if warmup_start > DEFAULT_WARMUP_START:
        raise DomainError(
            f"warm-up must start at or before {DEFAULT_WARMUP_START}, got {warmup_start}"
        )
    horizon = baseline_other.end_offset
    if baseline_other.start_offset != 1:
        raise AlignmentError("other-vendor baseline must start at offset 1")
    if horizon < 1:
        raise SimulationError("empty simulation horizon")
    if baseline_problematic.end_offset != horizon:
        raise AlignmentError(
            "problematic-vendor baseline must cover the warm-up through the horizon"
        )

    spawn_values = baseline_problematic.values
    base_counts = np.floor(spawn_values).astype(np.int64)
    fractions = spawn_values - base_counts
    minute_offsets = baseline_problematic.offsets()
    n_minutes = minute_offsets.size
    if n_minutes > _MAX_MINUTES:
        raise SimulationError(f"{n_minutes} simulated minutes exceeds the stream keyspace")

    tasks = [
        (rep, int(minute_offsets[i]), i, int(base_counts[i]), float(fractions[i]))
        for rep in range(replications)
        for i in range(n_minutes)
    ]

    def run(task):
        rep, minute_offset, minute_idx, count, fraction = task
        return rep, _simulate_cohort(
            rep,
            minute_offset,
            minute_idx,
            count,
            fraction,
            provider,
            dist,
            master_seed,
            horizon,
            stochastic_rounding,
        )

    if threads == 1:
        outputs = (run(task) for task in tasks)
    else:
        pool = ThreadPoolExecutor(max_workers=threads)
        outputs = pool.map(run, tasks)

    a_n0 = np.zeros((replications, horizon), dtype=np.int64)
    a_other = np.zeros((replications, horizon), dtype=np.int64)
    abandoned = np.zeros((replications, horizon), dtype=np.int64)
    spawned = np.zeros(replications, dtype=np.int64)
    in_flight = np.zeros(replications, dtype=np.int64)
    dropped = np.zeros(replications, dtype=np.int64)
    totals = np.zeros((replications, 3), dtype=np.int64)
    # pool.map yields in submission order, so the merge is independent of
    # completion order.
    try:
        for rep, (count, binned, flight, drop, cohort_totals) in outputs:
            spawned[rep] += count
            a_n0[rep] += binned[0]
            a_other[rep] += binned[1]
            abandoned[rep] += binned[2]
            in_flight[rep] += flight
            dropped[rep] += drop
            totals[rep] += cohort_totals
    finally:
        if threads > 1:
            pool.shutdown(wait=True)

    ledger = ConservationLedger(
        spawned=spawned,
        resolved_in_horizon=(a_n0 + a_other + abandoned).sum(axis=1),
        in_flight=in_flight,
        dropped=dropped,
        success_problematic_total=totals[:, 0],
        success_other_total=totals[:, 1],
        abandoned_total=totals[:, 2],
    )
    if not ledger.balanced():
        raise SimulationError("conservation violated: lost or double-counted customers")

    c_other = baseline_other.values
    a_n0_mean = a_n0.mean(axis=0)
    a_other_mean = a_other.mean(axis=0)
    w_on_reps = a_n0 + a_other + c_other[None, :]
    return WiredOnForecast(
        anchor_epoch_minute=baseline_problematic.anchor_epoch_minute,
        horizon=horizon,
        replications=replications,
        master_seed=master_seed,
        c_other=c_other,
        a_problematic_reps=a_n0,
        a_other_reps=a_other,
        abandoned_reps=abandoned,
        a_problematic_mean=a_n0_mean,
        a_other_mean=a_other_mean,
        abandoned_mean=abandoned.mean(axis=0),
        w_on_mean=a_n0_mean + a_other_mean + c_other,
        w_on_p10=np.percentile(w_on_reps, 10, axis=0),
        w_on_p90=np.percentile(w_on_reps, 90, axis=0),
        ledger=ledger,
    )


def wiredon_to_dict(forecast: WiredOnForecast) -> dict:
    ledger = forecast.ledger
    return {
        "anchor_epoch_minute": forecast.anchor_epoch_minute,
        "horizon": forecast.horizon,
        "replications": forecast.replications,
        "master_seed": forecast.master_seed,
        "c_other": forecast.c_other.tolist(),
        "a_problematic_reps": forecast.a_problematic_reps.tolist(),
        "a_other_reps": forecast.a_other_reps.tolist(),
        "abandoned_reps": forecast.abandoned_reps.tolist(),
        "a_problematic_mean": forecast.a_problematic_mean.tolist(),
        "a_other_mean": forecast.a_other_mean.tolist(),
        "abandoned_mean": forecast.abandoned_mean.tolist(),
        "w_on_mean": forecast.w_on_mean.tolist(),
        "w_on_p10": forecast.w_on_p10.tolist(),
        "w_on_p90": forecast.w_on_p90.tolist(),
        "ledger": {
            "spawned": ledger.spawned.tolist(),
            "resolved_in_horizon": ledger.resolved_in_horizon.tolist(),
            "in_flight": ledger.in_flight.tolist(),
            "dropped": ledger.dropped.tolist(),
            "success_problematic_total": ledger.success_problematic_total.tolist(),
            "success_other_total": ledger.success_other_total.tolist(),
            "abandoned_total": ledger.abandoned_total.tolist(),
        },
    }


def wiredon_from_dict(doc: dict) -> WiredOnForecast:
    led = doc["ledger"]
    ledger = ConservationLedger(
        spawned=np.asarray(led["spawned"], dtype=np.int64),
        resolved_in_horizon=np.asarray(led["resolved_in_horizon"], dtype=np.int64),
        in_flight=np.asarray(led["in_flight"], dtype=np.int64),
        dropped=np.asarray(led["dropped"], dtype=np.int64),
        success_problematic_total=np.asarray(led["success_problematic_total"], dtype=np.int64),
        success_other_total=np.asarray(led["success_other_total"], dtype=np.int64),
        abandoned_total=np.asarray(led["abandoned_total"], dtype=np.int64),
    )
    return WiredOnForecast(
        anchor_epoch_minute=doc["anchor_epoch_minute"],
        horizon=doc["horizon"],
        replications=doc["replications"],
        master_seed=doc["master_seed"],
        c_other=np.asarray(doc["c_other"], dtype=float),
        a_problematic_reps=np.asarray(doc["a_problematic_reps"], dtype=np.int64),
        a_other_reps=np.asarray(doc["a_other_reps"], dtype=np.int64),
        abandoned_reps=np.asarray(doc["abandoned_reps"], dtype=np.int64),
        a_problematic_mean=np.asarray(doc["a_problematic_mean"], dtype=float),
        a_other_mean=np.asarray(doc["a_other_mean"], dtype=float),
        abandoned_mean=np.asarray(doc["abandoned_mean"], dtype=float),
        w_on_mean=np.asarray(doc["w_on_mean"], dtype=float),
        w_on_p10=np.asarray(doc["w_on_p10"], dtype=float),
        w_on_p90=np.asarray(doc["w_on_p90"], dtype=float),
        ledger=ledger,
    )
