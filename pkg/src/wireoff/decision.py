"""Wire-off recommendation: compare the two forecast regimes.

The engine recommends wiring off at the earliest minute from which the
wired-off forecast stays strictly above the wired-on forecast through the
whole horizon. Ties keep the vendor wired on — disabling a vendor is the
disruptive action, so it needs a strict win.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, DomainError

__all__ = [
    "Recommendation",
    "ACTION_WIRE_OFF",
    "ACTION_KEEP_WIRED_ON",
    "recommend",
    "lead_time",
    "whatif_difference",
    "recommendation_to_dict",
    "recommendation_to_json",
]

ACTION_WIRE_OFF = "WireOffAt"
ACTION_KEEP_WIRED_ON = "KeepWiredOn"


@dataclass(frozen=True, eq=False)
class Recommendation:
    action: str
    m_star: int | None
    horizon: int
    anchor_epoch_minute: int
    wiredon_curve: np.ndarray = field(repr=False)
    wiredoff_curve: np.ndarray = field(repr=False)
    margin_curve: np.ndarray = field(repr=False)


def recommend(wiredon_curve, wiredoff_curve, anchor_epoch_minute: int = 0) -> Recommendation:
    """Pick the smallest m* with a strictly positive margin through the end.

    Curves cover minute offsets 1..R. Scanning from the right: m* is one
    past the last non-positive margin (or 1 if the margin is positive
    everywhere); if the margin at R itself is non-positive, no suffix
    qualifies and the vendor stays wired on.
    """
    w_on = np.asarray(wiredon_curve, dtype=float)
    w_off = np.asarray(wiredoff_curve, dtype=float)
    if w_on.size != w_off.size:
        raise AlignmentError(
            f"curves must cover the same horizon, got {w_on.size} and {w_off.size}"
        )
    horizon = w_on.size
    if horizon < 1:
        raise DomainError("need a horizon of at least one minute")
    margin = w_off - w_on

    nonpositive = np.nonzero(margin <= 0.0)[0]
    if nonpositive.size == 0:
        action, m_star = ACTION_WIRE_OFF, 1
    elif nonpositive[-1] == horizon - 1:
        action, m_star = ACTION_KEEP_WIRED_ON, None
    else:
        action, m_star = ACTION_WIRE_OFF, int(nonpositive[-1]) + 2

    return Recommendation(
        action=action,
        m_star=m_star,
        horizon=horizon,
        anchor_epoch_minute=anchor_epoch_minute,
        wiredon_curve=w_on,
        wiredoff_curve=w_off,
        margin_curve=margin,
    )


def lead_time(recommendation: Recommendation, actual_wireoff_m: int) -> int:
    """Minutes by which the engine beats the actual wire-off decision."""
    if recommendation.action != ACTION_WIRE_OFF:
        raise DomainError("lead time is undefined when the vendor stays wired on")
    return actual_wireoff_m - recommendation.m_star


def whatif_difference(recommendation: Recommendation, wireoff_m: int) -> dict:
    """Completed-experience totals for wiring off at a chosen minute.

    The what-if path follows the wired-on curve before wireoff_m and the
    wired-off curve from it onward; the comparison path stays wired on
    throughout. The difference is therefore the margin summed from
    wireoff_m to the horizon.
    """
    if not 1 <= wireoff_m <= recommendation.horizon:
        raise DomainError(
            f"wireoff_m must be within [1, {recommendation.horizon}], got {wireoff_m}"
        )
    idx = wireoff_m - 1
    on_total = float(np.sum(recommendation.wiredon_curve))
    off_path = float(
        np.sum(recommendation.wiredon_curve[:idx]) + np.sum(recommendation.wiredoff_curve[idx:])
    )
    return {
        "total_completed_off_path": off_path,
        "total_completed_on_path": on_total,
        "difference": float(np.sum(recommendation.margin_curve[idx:])),
    }


def recommendation_to_dict(recommendation: Recommendation) -> dict:
    return {
        "action": recommendation.action,
        "m_star": recommendation.m_star,
        "horizon": recommendation.horizon,
        "anchor_epoch_minute": recommendation.anchor_epoch_minute,
        "curves": {
            "wiredon": recommendation.wiredon_curve.tolist(),
            "wiredoff": recommendation.wiredoff_curve.tolist(),
        },
        "margin": recommendation.margin_curve.tolist(),
    }


def recommendation_to_json(recommendation: Recommendation) -> str:
    return json.dumps(recommendation_to_dict(recommendation), sort_keys=True)
