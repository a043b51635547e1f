"""Time indexing and minute-resolution series containers.

All series are anchored at a current time t0 (an epoch minute) and indexed
by signed integer minute offsets: m < 0 is history, m = 0 is now, m > 0 is
the future. Offsets within a series are consecutive by construction; gap
handling is the ingestion layer's job.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, DomainError

__all__ = [
    "TimeIndex",
    "MinuteSeries",
    "VolumeSeries",
    "AvailabilitySeries",
    "to_log",
    "rebase",
    "align",
]


@dataclass(frozen=True)
class TimeIndex:
    """A point in time expressed as (anchor epoch minute, signed offset)."""

    anchor_epoch_minute: int
    offset: int = 0

    @property
    def epoch_minute(self) -> int:
        return self.anchor_epoch_minute + self.offset

    @property
    def epoch_seconds(self) -> int:
        return self.epoch_minute * 60

    def shifted(self, minutes: int) -> "TimeIndex":
        return TimeIndex(self.anchor_epoch_minute, self.offset + minutes)

    @classmethod
    def from_epoch_minute(cls, anchor_epoch_minute: int, epoch_minute: int) -> "TimeIndex":
        return cls(anchor_epoch_minute, epoch_minute - anchor_epoch_minute)


def _as_readonly_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DomainError(f"series values must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DomainError("series must contain at least one observation")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MinuteSeries:
    """Consecutive per-minute observations starting at ``start_offset``.

    The value at position i belongs to minute offset ``start_offset + i``
    relative to ``anchor_epoch_minute``.
    """

    anchor_epoch_minute: int
    start_offset: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly_array(self.values))

    def __len__(self) -> int:
        return self.values.size

    @property
    def end_offset(self) -> int:
        return self.start_offset + len(self) - 1

    def offsets(self) -> np.ndarray:
        return np.arange(self.start_offset, self.end_offset + 1)

    def value_at(self, offset: int) -> float:
        if not self.start_offset <= offset <= self.end_offset:
            raise DomainError(
                f"offset {offset} outside series range [{self.start_offset}, {self.end_offset}]"
            )
        return float(self.values[offset - self.start_offset])

    def slice(self, start_offset: int, end_offset: int) -> "MinuteSeries":
        if start_offset > end_offset:
            raise DomainError(f"empty slice [{start_offset}, {end_offset}]")
        if start_offset < self.start_offset or end_offset > self.end_offset:
            raise DomainError(
                f"slice [{start_offset}, {end_offset}] outside series range "
                f"[{self.start_offset}, {self.end_offset}]"
            )
        lo = start_offset - self.start_offset
        hi = end_offset - self.start_offset + 1
        return self.replace_values(self.values[lo:hi], start_offset=start_offset)

    def replace_values(self, values, start_offset: int | None = None) -> "MinuteSeries":
        """New series of the same concrete type with different values."""
        kwargs = {}
        if hasattr(self, "vendor_id"):
            kwargs["vendor_id"] = self.vendor_id
        return type(self)(
            anchor_epoch_minute=self.anchor_epoch_minute,
            start_offset=self.start_offset if start_offset is None else start_offset,
            values=values,
            **kwargs,
        )


@dataclass(frozen=True, eq=False)
class VolumeSeries(MinuteSeries):
    """Completed customer experiences per minute for one vendor (all > 0)."""

    vendor_id: str = ""

    def __post_init__(self):
        super().__post_init__()
        bad = np.flatnonzero(~(self.values > 0))
        if bad.size:
            offset = self.start_offset + int(bad[0])
            raise DomainError(f"volume must be strictly positive: offset {offset} has {self.values[bad[0]]}")


@dataclass(frozen=True, eq=False)
class AvailabilitySeries(MinuteSeries):
    """Per-minute success probability for one vendor (values in [0, 1])."""

    vendor_id: str = ""

    def __post_init__(self):
        super().__post_init__()
        bad = np.flatnonzero((self.values < 0) | (self.values > 1))
        if bad.size:
            offset = self.start_offset + int(bad[0])
            raise DomainError(f"availability must lie in [0, 1]: offset {offset} has {self.values[bad[0]]}")


def to_log(series: MinuteSeries) -> MinuteSeries:
    """Elementwise natural log, preserving anchor and offsets."""
    bad = np.flatnonzero(~(series.values > 0))
    if bad.size:
        offset = series.start_offset + int(bad[0])
        raise DomainError(f"log undefined for non-positive value at offset {offset}")
    return MinuteSeries(series.anchor_epoch_minute, series.start_offset, np.log(series.values))


def rebase(series: MinuteSeries, anchor_epoch_minute: int) -> MinuteSeries:
    """Express the series relative to a different anchor minute.

    The observations keep their absolute timestamps; only the offset
    bookkeeping changes.
    """
    shift = series.anchor_epoch_minute - anchor_epoch_minute
    kwargs = {"vendor_id": series.vendor_id} if hasattr(series, "vendor_id") else {}
    return type(series)(
        anchor_epoch_minute=anchor_epoch_minute,
        start_offset=series.start_offset + shift,
        values=series.values,
        **kwargs,
    )


def align(a: MinuteSeries, b: MinuteSeries) -> tuple[MinuteSeries, MinuteSeries]:
    """Restrict both series to the intersection of their offset ranges."""
    if a.anchor_epoch_minute != b.anchor_epoch_minute:
        raise AlignmentError(
            f"anchors differ: {a.anchor_epoch_minute} vs {b.anchor_epoch_minute}"
        )
    lo = max(a.start_offset, b.start_offset)
    hi = min(a.end_offset, b.end_offset)
    if lo > hi:
        raise AlignmentError(
            f"offset ranges [{a.start_offset}, {a.end_offset}] and "
            f"[{b.start_offset}, {b.end_offset}] do not overlap"
        )
    return a.slice(lo, hi), b.slice(lo, hi)
