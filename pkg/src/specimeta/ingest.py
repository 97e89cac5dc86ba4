"""CSV delivery parsing and literal coercion."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime

from .errors import CoercionError, DuplicateSourceId, MalformedCsv, MissingHeader
from .terms import Datatype, Literal, lexical_is_valid, utc_now


@dataclass(frozen=True, slots=True)
class RawField:
    name: str
    value: str

    @property
    def is_blank(self) -> bool:
        return not self.value.strip()


@dataclass(frozen=True)
class SourceRecord:
    source_id: str
    fields: tuple[RawField, ...]
    row: int = 0

    def get(self, name: str) -> str | None:
        for f in self.fields:
            if f.name == name:
                return f.value
        return None

    @property
    def blank_fields(self) -> list[RawField]:
        return [f for f in self.fields if f.is_blank]


@dataclass(frozen=True, slots=True)
class RejectedRow:
    row: int
    reason: str


@dataclass
class Delivery:
    records: list[SourceRecord]
    source_name: str
    received_at: datetime = field(default_factory=utc_now)
    header: tuple[str, ...] = ()
    rejected: list[RejectedRow] = field(default_factory=list)

    def __post_init__(self):
        if not self.source_name:
            raise ValueError("source name must be non-empty")

    def __len__(self) -> int:
        return len(self.records)


def _normalize_newlines(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n")


def parse_record_table(content: bytes, id_column: str, source_name: str) -> Delivery:
    """Parse one CSV delivery into source records.

    Row numbers are the physical line on which each record starts, so the
    header is row 1. Rows whose key
    cell is blank, or whose cell count differs from the header, are
    rejected individually and listed on ``Delivery.rejected``.
    """
    try:
        text = content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedCsv(0, f"input is not UTF-8: {exc}") from None
    if text.startswith("\ufeff"):
        text = text[1:]

    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    rows: list[tuple[int, list[str]]] = []
    start = 1
    try:
        for row in reader:
            # blank physical lines are not records
            if row:
                rows.append((start, row))
            start = reader.line_num + 1
    except csv.Error as exc:
        raise MalformedCsv(reader.line_num, str(exc)) from None

    if not rows:
        raise MissingHeader("no header row")
    header = tuple(_normalize_newlines(h) for h in rows[0][1])
    wanted = id_column.strip().lower()
    matches = [i for i, h in enumerate(header) if h.strip().lower() == wanted]
    if not matches:
        raise MissingHeader(f"id column {id_column!r} not in header {list(header)}")
    key_index = matches[0]

    records: list[SourceRecord] = []
    rejected: list[RejectedRow] = []
    seen: dict[str, int] = {}
    for row_number, row in rows[1:]:
        if len(row) != len(header):
            rejected.append(RejectedRow(row_number, f"expected {len(header)} cells, found {len(row)}"))
            continue
        cells = [_normalize_newlines(c) for c in row]
        key = cells[key_index].strip()
        if not key:
            rejected.append(RejectedRow(row_number, f"blank {header[key_index]}"))
            continue
        if key in seen:
            raise DuplicateSourceId(key, row_number)
        seen[key] = row_number
        fields = tuple(RawField(name, value) for name, value in zip(header, cells))
        records.append(SourceRecord(key, fields, row_number))
    return Delivery(records, source_name, header=header, rejected=rejected)


def render_rejects(rejected: list[RejectedRow]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["rowNumber", "reason"])
    for r in rejected:
        writer.writerow([r.row, r.reason])
    return buf.getvalue().encode("utf-8")


_TRUE = {"true", "1", "yes"}
_FALSE = {"false", "0", "no"}


def coerce_value(raw: str, target: Datatype) -> Literal:
    text = raw.strip()
    if target is Datatype.STRING:
        return Literal(text)
    if target is Datatype.INTEGER:
        if not lexical_is_valid(text, target):
            raise CoercionError(raw, target)
        return Literal(str(int(text)), target)
    if target is Datatype.BOOLEAN:
        low = text.lower()
        if low in _TRUE:
            return Literal("true", target)
        if low in _FALSE:
            return Literal("false", target)
        raise CoercionError(raw, target)
    if not lexical_is_valid(text, target):
        raise CoercionError(raw, target)
    return Literal(text, target)
