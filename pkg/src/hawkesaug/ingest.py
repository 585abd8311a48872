"""Reading per-subject report files into anchored event series.

Input CSV has the header ``subject_id,timestamp,pain_level``; the JSON form
maps each subject id to a list of ``{"timestamp": ..., "pain_level": ...}``.
Only reports with a nonzero level are events. Timestamps may be ISO-8601
strings or numbers (epoch seconds by default, or day offsets with
``numeric_unit="days"``); they become fractional days from the subject's
first event.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import DataValidationError, EventSeries

SECONDS_PER_DAY = 86400.0
CSV_HEADER = ("subject_id", "timestamp", "pain_level")


@dataclass(frozen=True)
class RawReportRecord:
    subject_id: str
    timestamp: float  # days on an absolute axis
    pain_level: int
    line: int = 0


def parse_timestamp(value, numeric_unit: str = "seconds") -> float:
    """Absolute time in days."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        x = float(value)
    else:
        text = str(value).strip()
        try:
            x = float(text)
        except ValueError:
            if text.endswith("Z"):
                text = text[:-1] + "+00:00"
            try:
                dt = datetime.fromisoformat(text)
            except ValueError:
                raise DataValidationError(f"unparseable timestamp {value!r}") from None
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=timezone.utc)
            return dt.timestamp() / SECONDS_PER_DAY
    if not math.isfinite(x):
        raise DataValidationError(f"non-finite timestamp {value!r}")
    if numeric_unit == "seconds":
        return x / SECONDS_PER_DAY
    if numeric_unit == "days":
        return x
    raise ValueError(f"numeric_unit must be 'seconds' or 'days', got {numeric_unit!r}")


def _parse_level(value, where: str) -> int:
    try:
        level = float(value)
    except (TypeError, ValueError):
        raise DataValidationError(f"{where}: pain_level {value!r} is not a number") from None
    if not level.is_integer() or level < 0:
        raise DataValidationError(f"{where}: pain_level must be a nonnegative integer, got {value!r}")
    return int(level)


def read_records(path, format: str | None = None, numeric_unit: str = "seconds") -> list[RawReportRecord]:
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    records = []
    if fmt == "csv":
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(CSV_HEADER) - set(reader.fieldnames or ())
            if missing:
                raise DataValidationError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                line = reader.line_num
                where = f"{path}:{line}"
                sid = (row["subject_id"] or "").strip()
                if not sid:
                    raise DataValidationError(f"{where}: empty subject_id")
                try:
                    ts = parse_timestamp(row["timestamp"], numeric_unit)
                except DataValidationError as exc:
                    raise DataValidationError(f"{where}: {exc}") from None
                records.append(RawReportRecord(sid, ts, _parse_level(row["pain_level"], where), line))
    elif fmt == "json":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise DataValidationError(f"{path}: expected an object mapping subject_id to reports")
        for sid, reports in data.items():
            for k, rec in enumerate(reports):
                where = f"{path}: subject {sid!r} report {k}"
                try:
                    ts = parse_timestamp(rec["timestamp"], numeric_unit)
                    level = _parse_level(rec["pain_level"], where)
                except KeyError as exc:
                    raise DataValidationError(f"{where}: missing field {exc}") from None
                except DataValidationError as exc:
                    raise DataValidationError(f"{where}: {exc}") from None
                records.append(RawReportRecord(str(sid), ts, level, k))
    else:
        raise ValueError(f"unknown format {fmt!r} (expected csv or json)")
    return records


def records_to_series(records: Iterable[RawReportRecord], merge_duplicates: bool = False) -> list[EventSeries]:
    by_subject: "OrderedDict[str, list[RawReportRecord]]" = OrderedDict()
    for r in records:
        by_subject.setdefault(r.subject_id, []).append(r)
    out = []
    for sid, recs in by_subject.items():
        times = np.sort(np.array([r.timestamp for r in recs if r.pain_level > 0], dtype=float))
        if times.size == 0:
            warnings.warn(f"subject {sid!r} has no nonzero reports; dropped", stacklevel=3)
            continue
        dup = np.diff(times) == 0
        if dup.any():
            if not merge_duplicates:
                raise DataValidationError(
                    f"subject {sid!r} has {int(dup.sum())} duplicate event timestamp(s); "
                    "pass merge_duplicates to collapse them"
                )
            times = np.unique(times)
        out.append(EventSeries(times - times[0], None, sid))
    return out


def ingest(path, format: str | None = None, numeric_unit: str = "seconds",
           merge_duplicates: bool = False) -> list[EventSeries]:
    return records_to_series(read_records(path, format, numeric_unit), merge_duplicates)


def write_series(series: Sequence[EventSeries], path, format: str | None = None) -> None:
    """Write series as one event per report (level 1), timestamps in days.

    Reading back requires ``numeric_unit="days"``.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".") or "csv").lower()
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for s in series:
                for t in s.times:
                    w.writerow((s.id, repr(float(t)), 1))
    elif fmt == "json":
        data = {s.id: [{"timestamp": float(t), "pain_level": 1} for t in s.times] for s in series}
        path.write_text(json.dumps(data, indent=1))
    else:
        raise ValueError(f"unknown format {fmt!r}")
