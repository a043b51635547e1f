"""Customer behavior after a failed attempt with the problematic vendor.

Three distributions drive the per-customer simulation: the probability of
retrying after the k-th consecutive failure, the probability that a retry
targets a different vendor, and the empirical distribution of the delay
between a failure and the next attempt. All three are counted directly
from historical event logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EstimationError

__all__ = [
    "AttemptEvent",
    "BehaviorDistributions",
    "estimate",
    "sample_retry",
    "sample_switch",
    "sample_interattempt",
    "distributions_to_dict",
    "distributions_from_dict",
    "distributions_to_json",
    "distributions_from_json",
]

OUTCOME_SUCCESS = "success"
OUTCOME_FAILURE = "failure"


@dataclass(frozen=True)
class AttemptEvent:
    customer_id: str
    timestamp_seconds: int
    vendor_id: str
    outcome: str

    def __post_init__(self):
        if self.outcome not in (OUTCOME_SUCCESS, OUTCOME_FAILURE):
            raise DomainError(f"outcome must be success or failure, got {self.outcome!r}")


@dataclass(frozen=True, eq=False)
class BehaviorDistributions:
    """Retry/switch probabilities by consecutive-failure count, plus the
    interattempt delay distribution.

    Probabilities are stored for k = 1..k_max_observed; queries beyond the
    observed range return the last value (the simulation caps retries
    anyway, so the plateau is rarely exercised).
    """

    retry_p: tuple[float, ...]
    switch_p: tuple[float, ...]
    interattempt_seconds: np.ndarray = field(repr=False)
    interattempt_pmf: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.retry_p or len(self.retry_p) != len(self.switch_p):
            raise DomainError("retry_p and switch_p must be non-empty and equally long")
        for name, probs in (("retry_p", self.retry_p), ("switch_p", self.switch_p)):
            if any(not 0.0 <= p <= 1.0 for p in probs):
                raise DomainError(f"{name} entries must be probabilities in [0, 1]")
        seconds = np.asarray(self.interattempt_seconds, dtype=np.int64)
        pmf = np.asarray(self.interattempt_pmf, dtype=float)
        if seconds.size == 0 or seconds.size != pmf.size:
            raise DomainError("interattempt support and pmf must be non-empty and aligned")
        if np.any(seconds <= 0) or np.any(np.diff(seconds) <= 0):
            raise DomainError("interattempt support must be strictly increasing positive seconds")
        if np.any(pmf < 0.0) or abs(float(pmf.sum()) - 1.0) > 1e-12:
            raise DomainError("interattempt pmf must be non-negative and sum to 1")
        seconds = seconds.copy()
        pmf = pmf.copy()
        seconds.setflags(write=False)
        pmf.setflags(write=False)
        object.__setattr__(self, "interattempt_seconds", seconds)
        object.__setattr__(self, "interattempt_pmf", pmf)
        cdf = np.cumsum(pmf)
        cdf[-1] = 1.0
        cdf.setflags(write=False)
        object.__setattr__(self, "_interattempt_cdf", cdf)

    @property
    def k_max_observed(self) -> int:
        return len(self.retry_p)

    def _at(self, probs: tuple[float, ...], k: int) -> float:
        if k < 1:
            raise DomainError(f"failure count k must be >= 1, got {k}")
        return probs[min(k, len(probs)) - 1]

    def retry_prob(self, k: int) -> float:
        """P(any further attempt | k consecutive failures)."""
        return self._at(self.retry_p, k)

    def switch_prob(self, k: int) -> float:
        """P(retry targets another vendor | retrying after k failures)."""
        return self._at(self.switch_p, k)

    def interattempt_cdf(self, s: int) -> float:
        """P(delay <= s seconds)."""
        idx = int(np.searchsorted(self.interattempt_seconds, s, side="right"))
        return float(self._interattempt_cdf[idx - 1]) if idx > 0 else 0.0

    def interattempt_survival(self, s: int) -> float:
        """P(delay >= s seconds)."""
        if s <= int(self.interattempt_seconds[0]):
            return 1.0
        return 1.0 - self.interattempt_cdf(s - 1)


def _smoothed(numer: int, denom: int, smoothing: bool) -> float:
    if smoothing:
        return (numer + 1) / (denom + 2)
    if denom == 0:
        return 0.0
    return numer / denom


def estimate(
    events: list[AttemptEvent],
    problematic_vendor: str,
    window: tuple[int, int] | None = None,
    *,
    smoothing: bool = True,
) -> BehaviorDistributions:
    """Count retry/switch/delay behavior out of a historical event log.

    A customer's consecutive-failure count k increments on each failure
    with the problematic vendor and resets on any success or any attempt
    with a different vendor. Each k-th failure is one trial for the retry
    probability; the trial succeeds if any further attempt follows. Among
    those retries, the switch probability counts the ones whose next
    attempt targets a different vendor. Delays are the second gaps between
    a failure and the next attempt. Counts get add-one smoothing unless
    disabled.
    """
    if window is not None:
        lo, hi = window
        events = [e for e in events if lo <= e.timestamp_seconds <= hi]
    # Stable sort preserves file order for equal timestamps.
    by_customer: dict[str, list[AttemptEvent]] = {}
    for event in events:
        by_customer.setdefault(event.customer_id, []).append(event)

    reached: dict[int, int] = {}
    retried: dict[int, int] = {}
    switched: dict[int, int] = {}
    gaps: dict[int, int] = {}
    for sequence in by_customer.values():
        sequence.sort(key=lambda e: e.timestamp_seconds)
        k = 0
        pending: AttemptEvent | None = None
        for event in sequence:
            if pending is not None:
                retried[k] = retried.get(k, 0) + 1
                if event.vendor_id != problematic_vendor:
                    switched[k] = switched.get(k, 0) + 1
                gap = event.timestamp_seconds - pending.timestamp_seconds
                if gap >= 1:
                    gaps[gap] = gaps.get(gap, 0) + 1
                pending = None
            if event.outcome == OUTCOME_SUCCESS or event.vendor_id != problematic_vendor:
                k = 0
            else:
                k += 1
                reached[k] = reached.get(k, 0) + 1
                pending = event

    if not reached:
        raise EstimationError(
            f"no failures with vendor {problematic_vendor!r} in the given events"
        )
    if not gaps:
        raise EstimationError(
            "no retry delays observed: cannot build the interattempt distribution"
        )

    k_max = max(reached)
    retry_p = tuple(
        _smoothed(retried.get(k, 0), reached.get(k, 0), smoothing) for k in range(1, k_max + 1)
    )
    switch_p = tuple(
        _smoothed(switched.get(k, 0), retried.get(k, 0), smoothing) for k in range(1, k_max + 1)
    )
    seconds = np.array(sorted(gaps), dtype=np.int64)
    counts = np.array([gaps[s] for s in seconds], dtype=float)
    return BehaviorDistributions(
        retry_p=retry_p,
        switch_p=switch_p,
        interattempt_seconds=seconds,
        interattempt_pmf=counts / counts.sum(),
    )


def sample_retry(dist: BehaviorDistributions, k: int, rng: np.random.Generator) -> bool:
    return rng.random() < dist.retry_prob(k)


def sample_switch(dist: BehaviorDistributions, k: int, rng: np.random.Generator) -> bool:
    return rng.random() < dist.switch_prob(k)


def sample_interattempt(dist: BehaviorDistributions, rng: np.random.Generator) -> int:
    """Inverse-CDF draw from the empirical delay distribution."""
    u = rng.random()
    idx = int(np.searchsorted(dist._interattempt_cdf, u, side="right"))
    return int(dist.interattempt_seconds[min(idx, dist.interattempt_seconds.size - 1)])


def distributions_to_dict(dist: BehaviorDistributions) -> dict:
    return {
        "retry_p": {str(k): p for k, p in enumerate(dist.retry_p, start=1)},
        "switch_p": {str(k): p for k, p in enumerate(dist.switch_p, start=1)},
        "interattempt_pmf": [
            [int(s), float(p)] for s, p in zip(dist.interattempt_seconds, dist.interattempt_pmf)
        ],
    }


def distributions_from_dict(doc: dict) -> BehaviorDistributions:
    k_max = max(int(k) for k in doc["retry_p"])
    retry_p = tuple(float(doc["retry_p"][str(k)]) for k in range(1, k_max + 1))
    switch_p = tuple(float(doc["switch_p"][str(k)]) for k in range(1, k_max + 1))
    pairs = doc["interattempt_pmf"]
    return BehaviorDistributions(
        retry_p=retry_p,
        switch_p=switch_p,
        interattempt_seconds=np.array([s for s, _ in pairs], dtype=np.int64),
        interattempt_pmf=np.array([p for _, p in pairs], dtype=float),
    )


def distributions_to_json(dist: BehaviorDistributions) -> str:
    return json.dumps(distributions_to_dict(dist), sort_keys=True)


def distributions_from_json(text: str) -> BehaviorDistributions:
    return distributions_from_dict(json.loads(text))
