"""Synthetic incident scenarios with known ground truth.

Everything the pipeline ingests can be generated here: per-vendor volume
histories (exponentiated Fourier seasonality plus piecewise-linear trend
plus log-normal noise), an availability decline profile, customer event
logs, and a historical wire-off window with a known migration slope.

The event generator is written as its own straight-line process — it
shares no code with the forecasting simulator — so estimators and the
simulator can both be validated against the truth it embodies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .baseline import WEEK_MINUTES, fourier_design
from .behavior import AttemptEvent, BehaviorDistributions
from .core import AvailabilitySeries, VolumeSeries
from .errors import DomainError

__all__ = [
    "SyntheticVendor",
    "AvailabilityProfile",
    "BehaviorTruth",
    "Scenario",
    "SyntheticDataset",
    "log_volume_curve",
    "generate_volumes",
    "generate_availability",
    "generate_events",
    "generate_wireoff_history",
    "generate",
    "crossing_scenario",
    "no_crossing_scenario",
]

# Named sub-streams so each artifact is independently reproducible.
_STREAM_VOLUMES = 1
_STREAM_EVENTS = 2
_STREAM_WIREOFF = 3

DEFAULT_ANCHOR_EPOCH_MINUTE = 29_030_400  # an arbitrary Monday 00:00


@dataclass(frozen=True)
class SyntheticVendor:
    """True volume process for one vendor.

    Log volume is theta + kappa*m + sum of hinge terms + Fourier seasonal
    component with the given interleaved (cos, sin) weights.
    """

    vendor_id: str
    theta: float
    beta: tuple[float, ...] = ()
    kappa: float = 0.0
    changepoints: tuple[tuple[int, float], ...] = ()  # (offset, slope change)
    period: int = WEEK_MINUTES

    def __post_init__(self):
        if len(self.beta) % 2 != 0:
            raise DomainError("beta must interleave cos/sin pairs (even length)")


@dataclass(frozen=True)
class AvailabilityProfile:
    """Piecewise-linear availability over minute offsets, clamped to [0, 1]."""

    points: tuple[tuple[int, float], ...]

    def __post_init__(self):
        offsets = [p[0] for p in self.points]
        if not self.points or offsets != sorted(set(offsets)):
            raise DomainError("profile needs strictly increasing offsets")

    def value_at(self, m: float) -> float:
        pts = self.points
        if m <= pts[0][0]:
            raw = pts[0][1]
        elif m >= pts[-1][0]:
            raw = pts[-1][1]
        else:
            raw = 0.0
            for (m0, v0), (m1, v1) in zip(pts, pts[1:]):
                if m0 <= m <= m1:
                    raw = v0 + (v1 - v0) * (m - m0) / (m1 - m0)
                    break
        return min(1.0, max(0.0, raw))


@dataclass(frozen=True)
class BehaviorTruth:
    """True retry/switch/delay parameters driving the event process."""

    retry_p: tuple[float, ...]
    switch_p: tuple[float, ...]
    interattempt_seconds: tuple[int, ...]
    interattempt_probs: tuple[float, ...]

    def distributions(self) -> BehaviorDistributions:
        """The truth expressed in the estimator's output type."""
        return BehaviorDistributions(
            retry_p=self.retry_p,
            switch_p=self.switch_p,
            interattempt_seconds=np.array(self.interattempt_seconds, dtype=np.int64),
            interattempt_pmf=np.array(self.interattempt_probs, dtype=float),
        )

    def _plateau(self, probs: tuple[float, ...], k: int) -> float:
        return probs[min(k, len(probs)) - 1]

    def retry_prob(self, k: int) -> float:
        return self._plateau(self.retry_p, k)

    def switch_prob(self, k: int) -> float:
        return self._plateau(self.switch_p, k)


@dataclass(frozen=True)
class Scenario:
    name: str
    vendors: tuple[SyntheticVendor, ...]
    problematic_vendor: str
    availability_profile: AvailabilityProfile
    behavior: BehaviorTruth
    wireoff_delta: float
    horizon: int
    history_minutes: int
    noise_sigma: float
    seed: int
    actual_wireoff_m: int | None = None
    availability_minutes: int = 120
    event_minutes: int = 90
    event_customers_per_minute: int = 40
    event_availability: float = 0.5
    wireoff_history_minutes: int = 120
    wireoff_noise_fraction: float = 0.01
    anchor_epoch_minute: int = DEFAULT_ANCHOR_EPOCH_MINUTE

    def __post_init__(self):
        ids = [v.vendor_id for v in self.vendors]
        if len(set(ids)) != len(ids):
            raise DomainError("vendor ids must be unique")
        if self.problematic_vendor not in ids:
            raise DomainError(f"problematic vendor {self.problematic_vendor!r} not in vendors")
        if self.horizon < 1 or self.history_minutes < 2:
            raise DomainError("horizon must be >= 1 and history_minutes >= 2")


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    scenario: Scenario
    volumes: dict[str, VolumeSeries]
    availability: dict[str, AvailabilitySeries]
    events: list[AttemptEvent] = field(repr=False)
    wireoff_history: dict[str, np.ndarray] = field(repr=False)


def log_volume_curve(vendor: SyntheticVendor, offsets: np.ndarray) -> np.ndarray:
    """True log volume at the given minute offsets (no noise)."""
    offsets = np.asarray(offsets, dtype=float)
    log_value = np.full(offsets.shape, vendor.theta) + vendor.kappa * offsets
    for u, delta in vendor.changepoints:
        log_value += delta * np.clip(offsets - u, 0.0, None)
    if vendor.beta:
        harmonics = len(vendor.beta) // 2
        X = fourier_design(offsets, harmonics, vendor.period)
        log_value += X @ np.asarray(vendor.beta)
    return log_value


def generate_volumes(scenario: Scenario, rng: np.random.Generator) -> dict[str, VolumeSeries]:
    start = -(scenario.history_minutes - 1)
    offsets = np.arange(start, 1)
    out = {}
    for vendor in scenario.vendors:
        log_values = log_volume_curve(vendor, offsets)
        if scenario.noise_sigma > 0.0:
            log_values = log_values + rng.normal(0.0, scenario.noise_sigma, offsets.size)
        out[vendor.vendor_id] = VolumeSeries(
            anchor_epoch_minute=scenario.anchor_epoch_minute,
            start_offset=start,
            values=np.exp(log_values),
            vendor_id=vendor.vendor_id,
        )
    return out


def generate_availability(scenario: Scenario) -> dict[str, AvailabilitySeries]:
    start = -(scenario.availability_minutes - 1)
    offsets = np.arange(start, 1)
    values = np.array([scenario.availability_profile.value_at(m) for m in offsets])
    series = AvailabilitySeries(
        anchor_epoch_minute=scenario.anchor_epoch_minute,
        start_offset=start,
        values=values,
        vendor_id=scenario.problematic_vendor,
    )
    return {scenario.problematic_vendor: series}


def _other_vendor_id(scenario: Scenario) -> str:
    for vendor in scenario.vendors:
        if vendor.vendor_id != scenario.problematic_vendor:
            return vendor.vendor_id
    return "other"


def generate_events(scenario: Scenario, rng: np.random.Generator) -> list[AttemptEvent]:
    """Customer event log from the true behavior process.

    Customers experience a flat degraded availability (a past incident
    window), retry/switch/abandon per the truth parameters, and leave one
    event per attempt. Deliberately a straight-line re-implementation of
    the decision process: no retry cap, no shared code with the
    forecasting simulator.
    """
    truth = scenario.behavior
    support = np.asarray(scenario.behavior.interattempt_seconds)
    probs = np.asarray(scenario.behavior.interattempt_probs)
    other = _other_vendor_id(scenario)
    n0 = scenario.problematic_vendor
    # The event window sits one day before the anchor so it never overlaps
    # the live incident.
    window_end_s = (scenario.anchor_epoch_minute - 1440) * 60
    window_start_s = window_end_s - scenario.event_minutes * 60
    events: list[AttemptEvent] = []
    customer_counter = 0
    for minute in range(scenario.event_minutes):
        for _ in range(scenario.event_customers_per_minute):
            customer_id = f"c{customer_counter:07d}"
            customer_counter += 1
            t = window_start_s + minute * 60 + int(rng.integers(0, 60))
            k = 0
            while True:
                if rng.random() < scenario.event_availability:
                    events.append(AttemptEvent(customer_id, t, n0, "success"))
                    break
                events.append(AttemptEvent(customer_id, t, n0, "failure"))
                k += 1
                if rng.random() >= truth.retry_prob(k):
                    break
                t += int(support[np.searchsorted(np.cumsum(probs), rng.random(), side="right")])
                if rng.random() < truth.switch_prob(k):
                    events.append(AttemptEvent(customer_id, t, other, "success"))
                    break
    return events


def generate_wireoff_history(scenario: Scenario, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Historical wire-off window with the true migration slope baked in.

    Offsets are minutes of a past incident (ending a week before the
    anchor); noise is Gaussian at a fraction of the wired-off level.
    """
    n = scenario.wireoff_history_minutes
    # A week back, so the window is disjoint from the live incident.
    offsets = np.arange(-WEEK_MINUTES, -WEEK_MINUTES + n)
    n0 = next(v for v in scenario.vendors if v.vendor_id == scenario.problematic_vendor)
    others = [v for v in scenario.vendors if v.vendor_id != scenario.problematic_vendor]
    c_n0 = np.exp(log_volume_curve(n0, offsets))
    c_other = np.zeros(n)
    for vendor in others:
        c_other += np.exp(log_volume_curve(vendor, offsets))
    w_off = scenario.wireoff_delta * c_n0 + c_other
    if scenario.wireoff_noise_fraction > 0.0:
        scale = scenario.wireoff_noise_fraction * float(np.mean(w_off))
        w_off = w_off + rng.normal(0.0, scale, n)
    return {"offsets": offsets, "w_off": w_off, "c_n0": c_n0, "c_other": c_other}


def generate(scenario: Scenario) -> SyntheticDataset:
    """All pipeline inputs for one scenario, deterministically from its seed."""
    streams = {
        name: np.random.default_rng(np.random.SeedSequence([scenario.seed, tag]))
        for name, tag in (
            ("volumes", _STREAM_VOLUMES),
            ("events", _STREAM_EVENTS),
            ("wireoff", _STREAM_WIREOFF),
        )
    }
    return SyntheticDataset(
        scenario=scenario,
        volumes=generate_volumes(scenario, streams["volumes"]),
        availability=generate_availability(scenario),
        events=generate_events(scenario, streams["events"]),
        wireoff_history=generate_wireoff_history(scenario, streams["wireoff"]),
    )


def _weekly_shape(daily: float, half_daily: float) -> tuple[float, ...]:
    """Interleaved Fourier weights giving a plausible daily rhythm.

    The weekly fundamental's 7th and 14th harmonics are the daily and
    half-daily cycles, so weights go at those positions.
    """
    beta = [0.0] * (2 * 14)
    beta[2 * 6] = daily  # cos of harmonic 7
    beta[2 * 13] = half_daily  # cos of harmonic 14
    return tuple(beta)


def crossing_scenario(seed: int = 11) -> Scenario:
    """Bundled incident where wiring off early is clearly beneficial.

    The availability decline must span the whole smoothing-model fit
    window: the fit objective scores a level-only model (alpha=1, eta=0)
    at exactly zero error whenever the window's first two observations are
    equal, which would freeze the forecast at the last level and hide the
    decline.
    """
    vendors = (
        SyntheticVendor(vendor_id="pay-a", theta=math.log(120.0), beta=_weekly_shape(0.10, 0.05)),
        SyntheticVendor(vendor_id="pay-b", theta=math.log(240.0), beta=_weekly_shape(0.08, 0.04)),
    )
    profile = AvailabilityProfile(points=((-120, 1.0), (-50, 1.0), (0, 0.65)))
    behavior = BehaviorTruth(
        retry_p=(0.6,),
        switch_p=(0.3,),
        interattempt_seconds=(30, 60, 120),
        interattempt_probs=(0.25, 0.5, 0.25),
    )
    return Scenario(
        name="crossing",
        vendors=vendors,
        problematic_vendor="pay-a",
        availability_profile=profile,
        behavior=behavior,
        wireoff_delta=0.8,
        horizon=60,
        history_minutes=2 * WEEK_MINUTES,
        noise_sigma=0.02,
        seed=seed,
        actual_wireoff_m=30,
    )


def no_crossing_scenario(seed: int = 12) -> Scenario:
    """Bundled incident where the vendor should stay wired on: the dip is
    mild, most customers still succeed, and migration is weak."""
    base = crossing_scenario(seed=seed)
    profile = AvailabilityProfile(points=((-120, 1.0), (-50, 1.0), (0, 0.93)))
    return replace(
        base,
        name="no_crossing",
        availability_profile=profile,
        wireoff_delta=0.5,
        actual_wireoff_m=None,
    )
