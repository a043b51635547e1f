"""Flat-file ingestion and emission.

CSV readers validate eagerly and report the offending line; writers are
atomic (temp file + rename) and print floats with shortest round-trip
precision so a write/read cycle reproduces values bit for bit.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .behavior import AttemptEvent
from .core import AvailabilitySeries, VolumeSeries
from .errors import DomainError, GapError, ParseError, ValidationError

__all__ = [
    "load_volumes",
    "write_volumes",
    "load_availability",
    "write_availability",
    "load_events",
    "write_events",
    "load_wireoff_history",
    "write_wireoff_history",
    "write_wiredon_csv",
    "write_qq_csv",
    "write_acf_csv",
    "atomic_write_text",
]

VOLUME_GAP_LIMIT = 5  # missing minutes we are willing to interpolate
AVAILABILITY_GAP_LIMIT = 10  # missing minutes we are willing to forward-fill

VOLUMES_HEADER = ["timestamp_minute", "vendor_id", "count"]
AVAILABILITY_HEADER = ["timestamp_minute", "vendor_id", "availability"]
EVENTS_HEADER = ["customer_id", "timestamp_seconds", "vendor_id", "outcome"]
WIREOFF_HISTORY_HEADER = ["offset_m", "w_off", "c_n0", "c_other"]
WIREDON_HEADER = ["offset_m", "W_on_mean", "W_on_p10", "W_on_p90", "A_n0", "A_other", "C_other"]


def atomic_write_text(path, text: str) -> None:
    """Write text so readers never observe a half-written file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_rows(path, expected_header: list[str]):
    """Yield (line_number, row) pairs after validating the header."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file", line=1) from None
        if header != expected_header:
            raise ParseError(
                f"{path}: expected header {','.join(expected_header)}, got {','.join(header)}",
                line=1,
            )
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected_header):
                raise ParseError(
                    f"{path}: expected {len(expected_header)} fields, got {len(row)}",
                    line=line_number,
                )
            yield line_number, row


def _parse_int(text: str, path, line: int, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{path}: {what} {text!r} is not an integer", line=line) from None


def _parse_float(text: str, path, line: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{path}: {what} {text!r} is not a number", line=line) from None
    if not np.isfinite(value):
        raise ParseError(f"{path}: {what} must be finite, got {text!r}", line=line)
    return value


def _collect_per_vendor(path, header, value_name):
    per_vendor: dict[str, dict[int, float]] = {}
    for line_number, row in _read_rows(path, header):
        ts = _parse_int(row[0], path, line_number, "timestamp_minute")
        vendor = row[1]
        if not vendor:
            raise ParseError(f"{path}: empty vendor_id", line=line_number)
        value = _parse_float(row[2], path, line_number, value_name)
        rows = per_vendor.setdefault(vendor, {})
        if ts in rows:
            raise ParseError(
                f"{path}: duplicate minute {ts} for vendor {vendor}", line=line_number
            )
        rows[ts] = value
    if not per_vendor:
        raise ParseError(f"{path}: no data rows", line=2)
    return per_vendor


def load_volumes(path) -> dict[str, VolumeSeries]:
    """Per-vendor volume series anchored at the newest minute in the file.

    Gaps of up to 5 minutes are filled by linear interpolation between the
    surrounding observations; anything longer is an error.
    """
    per_vendor = _collect_per_vendor(path, VOLUMES_HEADER, "count")
    anchor = max(ts for rows in per_vendor.values() for ts in rows)
    out: dict[str, VolumeSeries] = {}
    for vendor, rows in per_vendor.items():
        timestamps = sorted(rows)
        values: list[float] = []
        for prev_ts, next_ts in zip(timestamps, timestamps[1:]):
            values.append(rows[prev_ts])
            missing = next_ts - prev_ts - 1
            if missing > VOLUME_GAP_LIMIT:
                raise GapError(
                    f"{path}: vendor {vendor} has a {missing}-minute gap "
                    f"({prev_ts + 1}..{next_ts - 1})"
                )
            if missing:
                step = (rows[next_ts] - rows[prev_ts]) / (missing + 1)
                values.extend(rows[prev_ts] + step * j for j in range(1, missing + 1))
        values.append(rows[timestamps[-1]])
        if any(v <= 0.0 for v in values):
            raise DomainError(f"{path}: vendor {vendor} has non-positive volume")
        out[vendor] = VolumeSeries(
            anchor_epoch_minute=anchor,
            start_offset=timestamps[0] - anchor,
            values=np.array(values),
            vendor_id=vendor,
        )
    return out


def write_volumes(series_by_vendor: dict[str, VolumeSeries], path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(VOLUMES_HEADER)
    for vendor in sorted(series_by_vendor):
        series = series_by_vendor[vendor]
        for offset, value in zip(series.offsets(), series.values):
            writer.writerow([series.anchor_epoch_minute + int(offset), vendor, repr(float(value))])
    atomic_write_text(path, buffer.getvalue())


def load_availability(path, max_gap: int = AVAILABILITY_GAP_LIMIT) -> dict[str, AvailabilitySeries]:
    """Per-vendor availability, forward-filling gaps of up to max_gap minutes."""
    per_vendor = _collect_per_vendor(path, AVAILABILITY_HEADER, "availability")
    anchor = max(ts for rows in per_vendor.values() for ts in rows)
    out: dict[str, AvailabilitySeries] = {}
    for vendor, rows in per_vendor.items():
        timestamps = sorted(rows)
        values: list[float] = []
        for prev_ts, next_ts in zip(timestamps, timestamps[1:]):
            values.append(rows[prev_ts])
            missing = next_ts - prev_ts - 1
            if missing > max_gap:
                raise ValidationError(
                    f"{path}: vendor {vendor} availability has a {missing}-minute gap "
                    f"({prev_ts + 1}..{next_ts - 1}), beyond the {max_gap}-minute fill limit"
                )
            values.extend([rows[prev_ts]] * missing)
        values.append(rows[timestamps[-1]])
        out[vendor] = AvailabilitySeries(
            anchor_epoch_minute=anchor,
            start_offset=timestamps[0] - anchor,
            values=np.array(values),
            vendor_id=vendor,
        )
    return out


def write_availability(series_by_vendor: dict[str, AvailabilitySeries], path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(AVAILABILITY_HEADER)
    for vendor in sorted(series_by_vendor):
        series = series_by_vendor[vendor]
        for offset, value in zip(series.offsets(), series.values):
            writer.writerow([series.anchor_epoch_minute + int(offset), vendor, repr(float(value))])
    atomic_write_text(path, buffer.getvalue())


def load_events(path) -> list[AttemptEvent]:
    events = []
    for line_number, row in _read_rows(path, EVENTS_HEADER):
        if not row[0]:
            raise ParseError(f"{path}: empty customer_id", line=line_number)
        if row[3] not in ("success", "failure"):
            raise ParseError(
                f"{path}: outcome must be success or failure, got {row[3]!r}", line=line_number
            )
        events.append(
            AttemptEvent(
                customer_id=row[0],
                timestamp_seconds=_parse_int(row[1], path, line_number, "timestamp_seconds"),
                vendor_id=row[2],
                outcome=row[3],
            )
        )
    if not events:
        raise ParseError(f"{path}: no data rows", line=2)
    return events


def write_events(events: list[AttemptEvent], path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(EVENTS_HEADER)
    for event in events:
        writer.writerow(
            [event.customer_id, event.timestamp_seconds, event.vendor_id, event.outcome]
        )
    atomic_write_text(path, buffer.getvalue())


def load_wireoff_history(path) -> dict[str, np.ndarray]:
    """Historical wire-off window: observed totals plus both baselines."""
    offsets, w_off, c_n0, c_other = [], [], [], []
    for line_number, row in _read_rows(path, WIREOFF_HISTORY_HEADER):
        offsets.append(_parse_int(row[0], path, line_number, "offset_m"))
        w_off.append(_parse_float(row[1], path, line_number, "w_off"))
        c_n0.append(_parse_float(row[2], path, line_number, "c_n0"))
        c_other.append(_parse_float(row[3], path, line_number, "c_other"))
    if not offsets:
        raise ParseError(f"{path}: no data rows", line=2)
    return {
        "offsets": np.array(offsets, dtype=np.int64),
        "w_off": np.array(w_off),
        "c_n0": np.array(c_n0),
        "c_other": np.array(c_other),
    }


def write_wireoff_history(offsets, w_off, c_n0, c_other, path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(WIREOFF_HISTORY_HEADER)
    for m, w, n0, other in zip(offsets, w_off, c_n0, c_other):
        writer.writerow([int(m), repr(float(w)), repr(float(n0)), repr(float(other))])
    atomic_write_text(path, buffer.getvalue())


def write_wiredon_csv(forecast, path) -> None:
    """Per-minute simulation summary (see simulator.WiredOnForecast)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(WIREDON_HEADER)
    for i, offset in enumerate(forecast.offsets()):
        writer.writerow(
            [
                int(offset),
                repr(float(forecast.w_on_mean[i])),
                repr(float(forecast.w_on_p10[i])),
                repr(float(forecast.w_on_p90[i])),
                repr(float(forecast.a_problematic_mean[i])),
                repr(float(forecast.a_other_mean[i])),
                repr(float(forecast.c_other[i])),
            ]
        )
    atomic_write_text(path, buffer.getvalue())


def write_qq_csv(report, path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["theoretical_quantile", "sample_quantile"])
    for theoretical, sample in report.qq:
        writer.writerow([repr(float(theoretical)), repr(float(sample))])
    atomic_write_text(path, buffer.getvalue())


def write_acf_csv(correlations, ci_halfwidth: float, path) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["lag", "acf", "ci_halfwidth"])
    for lag, value in enumerate(np.asarray(correlations, dtype=float)):
        writer.writerow([lag, repr(float(value)), repr(float(ci_halfwidth))])
    atomic_write_text(path, buffer.getvalue())
