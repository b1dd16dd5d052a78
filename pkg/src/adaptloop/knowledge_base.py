"""Append-only store of anomaly, decision, enactment and feedback records.

The on-disk format is the interchange CSV itself: one header line, then one
row per record, appended and flushed as records arrive. Numbers are rounded to
9 significant digits when a record is appended, so what is held in memory is
exactly what a CSV round trip reproduces.
"""
from __future__ import annotations

import csv
import enum
import io
import math
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator

from .errors import InvalidRecord, ParseError
from .monitor import Category

HEADER = (
    "record_id",
    "session_id",
    "timestamp_s",
    "record_kind",
    "anomaly_category",
    "severity_ms",
    "adaptation",
    "ct",
    "impact_i",
    "rat_s",
    "cost_per_hr",
    "risk_rf",
    "outcome_latency_ms",
)

DEFAULT_ALPHA = 0.5


class RecordKind(str, enum.Enum):
    ANOMALY_DETECTED = "AnomalyDetected"
    DECISION_MADE = "DecisionMade"
    ADAPTATION_ENACTED = "AdaptationEnacted"
    FEEDBACK_MEASURED = "FeedbackMeasured"


_OPTIONAL = ("anomaly_category", "severity_ms", "adaptation", "ct", "impact_i", "rat_s", "cost_per_hr", "risk_rf", "outcome_latency_ms")

# kind -> (required, allowed) optional columns; everything else must be empty
_SCHEMA = {
    RecordKind.ANOMALY_DETECTED: ({"anomaly_category", "severity_ms"}, {"outcome_latency_ms"}),
    RecordKind.DECISION_MADE: (
        {"anomaly_category", "adaptation", "ct"},
        {"impact_i", "rat_s", "cost_per_hr", "risk_rf"},
    ),
    RecordKind.ADAPTATION_ENACTED: (
        {"anomaly_category", "adaptation"},
        {"rat_s", "cost_per_hr", "risk_rf", "outcome_latency_ms"},
    ),
    RecordKind.FEEDBACK_MEASURED: ({"anomaly_category", "adaptation", "impact_i", "outcome_latency_ms"}, set()),
}

_FLOATS = ("timestamp_s", "severity_ms", "impact_i", "rat_s", "cost_per_hr", "risk_rf", "outcome_latency_ms")


def _fmt(x: float) -> str:
    return format(x, ".9g")


def _canon(x: float) -> float:
    return float(_fmt(x))


@dataclass(frozen=True)
class KbRecord:
    session_id: str
    timestamp_s: float
    record_kind: RecordKind
    anomaly_category: Category | None = None
    severity_ms: float | None = None
    adaptation: str | None = None
    ct: int | None = None
    impact_i: float | None = None
    rat_s: float | None = None
    cost_per_hr: float | None = None
    risk_rf: float | None = None
    outcome_latency_ms: float | None = None
    record_id: int | None = None

    def validate(self) -> "KbRecord":
        """Check the per-kind schema and value ranges; returns a canonical copy."""
        try:
            kind = RecordKind(self.record_kind)
        except ValueError:
            raise InvalidRecord(f"unknown record_kind {self.record_kind!r}") from None
        if not self.session_id or any(c in self.session_id for c in "\r\n"):
            raise InvalidRecord("session_id must be a non-empty single-line string")
        required, allowed = _SCHEMA[kind]
        for name in _OPTIONAL:
            value = getattr(self, name)
            if name in required and value is None:
                raise InvalidRecord(f"{kind.value} record requires {name}")
            if value is not None and name not in required and name not in allowed:
                raise InvalidRecord(f"{kind.value} record must leave {name} empty")
        changes: dict = {"record_kind": kind}
        for name in _FLOATS:
            v = getattr(self, name)
            if v is None:
                continue
            if not math.isfinite(v):
                raise InvalidRecord(f"{name} must be finite")
            changes[name] = _canon(float(v))
        if self.anomaly_category is not None:
            changes["anomaly_category"] = Category.parse(self.anomaly_category)
        if changes["timestamp_s"] < 0:
            raise InvalidRecord("timestamp_s must be non-negative")
        for name in ("severity_ms", "rat_s", "cost_per_hr", "outcome_latency_ms"):
            if changes.get(name, 0.0) < 0:
                raise InvalidRecord(f"{name} must be non-negative")
        for name in ("impact_i", "risk_rf"):
            if name in changes and not 0.0 <= changes[name] <= 1.0:
                raise InvalidRecord(f"{name} must lie in [0, 1]")
        if self.ct is not None and (isinstance(self.ct, bool) or int(self.ct) != self.ct or self.ct < 0):
            raise InvalidRecord("ct must be a non-negative integer")
        if self.adaptation is not None and (not self.adaptation or "," in self.adaptation):
            raise InvalidRecord("adaptation must be a non-empty name without commas")
        return replace(self, **changes)

    def to_row(self) -> list[str]:
        row = []
        for name in HEADER:
            v = getattr(self, name)
            if v is None:
                row.append("")
            elif isinstance(v, enum.Enum):
                row.append(v.value)
            elif isinstance(v, float):
                row.append(_fmt(v))
            else:
                row.append(str(v))
        return row


@dataclass(frozen=True)
class HistoryEntry:
    """Aggregated use count and smoothed measured impact of one adaptation."""

    an: str
    ct: int
    i: float | None


def _parse_row(row: list[str], line: int) -> KbRecord:
    if len(row) != len(HEADER):
        raise ParseError(f"expected {len(HEADER)} fields, got {len(row)}", line)
    raw = dict(zip(HEADER, row))
    values: dict = {}
    try:
        for name in HEADER:
            text = raw[name]
            if text == "":
                values[name] = None
            elif name in ("record_id", "ct"):
                values[name] = int(text)
            elif name in _FLOATS:
                values[name] = float(text)
            elif name == "record_kind":
                values[name] = RecordKind(text)
            elif name == "anomaly_category":
                values[name] = Category.parse(text)
            else:
                values[name] = text
    except ValueError as exc:
        raise ParseError(f"bad value in column {name!r}: {exc}", line) from None
    if values["record_id"] is None or values["timestamp_s"] is None or values["record_kind"] is None:
        raise ParseError("record_id, timestamp_s and record_kind are required", line)
    values["session_id"] = values["session_id"] or ""
    rec = KbRecord(**values)
    try:
        return rec.validate()
    except InvalidRecord as exc:
        raise ParseError(str(exc), line) from None


def read_csv(path: str | Path) -> list[KbRecord]:
    """Parse a KB CSV file; raises :class:`ParseError` with the 1-based line."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file, header expected", 1) from None
        if tuple(header) != HEADER:
            raise ParseError("header does not match the KB schema", 1)
        out = []
        last_id = 0
        for row in reader:
            line = reader.line_num
            rec = _parse_row(row, line)
            if rec.record_id <= last_id:
                raise ParseError("record_id must increase strictly", line)
            last_id = rec.record_id
            out.append(rec)
    return out


def _write_rows(fh, records: Iterable[KbRecord], header: bool) -> None:
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow(HEADER)
    for r in records:
        w.writerow(r.to_row())


class KnowledgeBase:
    """Append-only record store, in memory or backed by a CSV file.

    Opening an existing file loads a snapshot of it. Only one writer may hold
    a given file at a time.
    """

    def __init__(self, path: str | Path | None = None, alpha: float = DEFAULT_ALPHA):
        if not 0.0 < alpha <= 1.0:
            raise InvalidRecord(f"alpha must lie in (0, 1]: {alpha}")
        self.alpha = alpha
        self.path = Path(path) if path is not None else None
        self._records: list[KbRecord] = []
        self._last_ts: dict[str, float] = {}
        if self.path is not None:
            if self.path.exists() and self.path.stat().st_size > 0:
                for rec in read_csv(self.path):
                    self._admit(rec)
            else:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "w", newline="", encoding="utf-8") as fh:
                    _write_rows(fh, (), header=True)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[KbRecord]:
        return iter(tuple(self._records))

    @property
    def records(self) -> tuple[KbRecord, ...]:
        return tuple(self._records)

    def _admit(self, rec: KbRecord) -> KbRecord:
        last = self._last_ts.get(rec.session_id)
        if last is not None and rec.timestamp_s < last:
            raise InvalidRecord(
                f"timestamp {rec.timestamp_s} precedes the last one ({last}) in session {rec.session_id!r}"
            )
        rec = replace(rec, record_id=len(self._records) + 1)
        self._records.append(rec)
        self._last_ts[rec.session_id] = rec.timestamp_s
        return rec

    def append(self, record: KbRecord) -> int:
        rec = self._admit(record.validate())
        if self.path is not None:
            with open(self.path, "a", newline="", encoding="utf-8") as fh:
                _write_rows(fh, (rec,), header=False)
                fh.flush()
                os.fsync(fh.fileno())
        return rec.record_id

    def extend(self, records: Iterable[KbRecord]) -> list[int]:
        return [self.append(r) for r in records]

    def history(self, anomaly_category: Category | str) -> list[HistoryEntry]:
        """Per-adaptation use count and EMA of measured impact, in first-seen order."""
        cat = Category.parse(anomaly_category)
        ct: dict[str, int] = {}
        impact: dict[str, float] = {}
        for r in self._records:
            if r.anomaly_category is not cat or r.adaptation is None:
                continue
            if r.record_kind is RecordKind.DECISION_MADE:
                ct[r.adaptation] = ct.get(r.adaptation, 0) + 1
            elif r.record_kind is RecordKind.FEEDBACK_MEASURED:
                ct.setdefault(r.adaptation, 0)
                prev = impact.get(r.adaptation)
                impact[r.adaptation] = (
                    r.impact_i if prev is None else self.alpha * r.impact_i + (1 - self.alpha) * prev
                )
        return [HistoryEntry(an, n, impact.get(an)) for an, n in ct.items()]

    def use_count(self, anomaly_category: Category | str, adaptation: str) -> int:
        for h in self.history(anomaly_category):
            if h.an == adaptation:
                return h.ct
        return 0

    def last_timestamp(self, session_id: str) -> float | None:
        return self._last_ts.get(session_id)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        _write_rows(buf, self._records, header=True)
        return buf.getvalue()

    def export_csv(self, path: str | Path) -> int:
        Path(path).write_text(self.to_csv_text(), encoding="utf-8", newline="")
        return len(self._records)

    def import_csv(self, path: str | Path) -> int:
        """Append every record of a KB CSV file, or none of them; ids are reassigned in order."""
        records = read_csv(path)
        last = dict(self._last_ts)
        for r in records:
            prev = last.get(r.session_id)
            if prev is not None and r.timestamp_s < prev:
                raise InvalidRecord(
                    f"record {r.record_id} at {r.timestamp_s} precedes {prev} in session {r.session_id!r}; nothing imported"
                )
            last[r.session_id] = r.timestamp_s
        for r in records:
            self.append(replace(r, record_id=None))
        return len(records)
