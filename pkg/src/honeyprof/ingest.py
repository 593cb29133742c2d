"""Flow-log parsing and attack resolution.

Files are read through a :class:`FlowSchema` that maps logical fields onto
columns (by header name or 0-based index).  Bad rows are counted, never
fatal; a schema that points at missing columns is.
"""
from __future__ import annotations

import configparser
import csv
import heapq
import io
import ipaddress
import logging
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Iterator

from .flowcore import SERVICE_PROTOCOLS, Attack, FlowRecord, HoneypotRegistry

log = logging.getLogger(__name__)

FIELDS = ("start_time", "duration", "protocol", "src_ip", "src_port", "dst_ip", "dst_port")


class IngestConfigError(Exception):
    """Unreadable input or a schema that does not fit the file."""


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_parsed: int = 0
    rows_malformed: int = 0
    rows_dropped_arp: int = 0
    rows_dropped_unknown_dst: int = 0
    attacks_emitted: int = 0

    def consistent(self) -> bool:
        return (
            self.rows_read == self.rows_parsed + self.rows_malformed
            and self.rows_parsed
            == self.attacks_emitted + self.rows_dropped_arp + self.rows_dropped_unknown_dst
        )

    def __iadd__(self, other: "IngestReport") -> "IngestReport":
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self


@dataclass(frozen=True)
class FlowSchema:
    """Column mapping for a delimiter-separated flow log.

    Each entry in ``columns`` is either a header name or a 0-based integer
    index.  ``timestamp_format`` is a ``strptime`` pattern, ``"iso"`` for
    ISO 8601 or ``"epoch"`` for float seconds.  Naive timestamps are UTC.
    """

    columns: dict[str, str | int]
    delimiter: str = ","
    timestamp_format: str = "iso"
    has_header: bool = True

    def __post_init__(self):
        missing = [f for f in FIELDS if f not in self.columns]
        if missing:
            raise IngestConfigError(f"schema does not map fields: {missing}")
        if not self.has_header and any(isinstance(v, str) for v in self.columns.values()):
            raise IngestConfigError("header names used in a schema without a header row")

    @classmethod
    def load(cls, path: str | Path) -> "FlowSchema":
        """Read a ``key = value`` schema file.

        Keys: ``delimiter``, ``timestamp_format``, ``has_header`` and one
        key per field in :data:`FIELDS`.  ``preset = argus`` starts from
        :data:`ARGUS_BINETFLOW` and lets the remaining keys override it.
        """
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise IngestConfigError(f"cannot read schema {path}: {exc}") from exc
        parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
        parser.optionxform = str
        parser.read_string("[schema]\n" + text)
        raw = dict(parser["schema"])
        base = {}
        preset = raw.pop("preset", None)
        if preset is not None:
            if preset.strip().lower() not in PRESETS:
                raise IngestConfigError(f"unknown schema preset {preset!r}")
            p = PRESETS[preset.strip().lower()]
            base = dict(
                columns=dict(p.columns),
                delimiter=p.delimiter,
                timestamp_format=p.timestamp_format,
                has_header=p.has_header,
            )
        columns = dict(base.get("columns", {}))
        for name in FIELDS:
            if name in raw:
                value = raw.pop(name).strip()
                columns[name] = int(value) if value.isdigit() else value
        kwargs = {k: v for k, v in base.items() if k != "columns"}
        if "delimiter" in raw:
            d = raw.pop("delimiter")
            kwargs["delimiter"] = "\t" if d.strip() in ("\\t", "tab") else d.strip() or ","
        if "timestamp_format" in raw:
            kwargs["timestamp_format"] = raw.pop("timestamp_format").strip()
        if "has_header" in raw:
            kwargs["has_header"] = raw.pop("has_header").strip().lower() in ("1", "true", "yes")
        if raw:
            raise IngestConfigError(f"unknown schema keys: {sorted(raw)}")
        return cls(columns=columns, **kwargs)

    def dump(self) -> str:
        lines = [
            f"delimiter = {self.delimiter if self.delimiter != chr(9) else 'tab'}",
            f"timestamp_format = {self.timestamp_format}",
            f"has_header = {str(self.has_header).lower()}",
        ]
        lines += [f"{k} = {self.columns[k]}" for k in FIELDS]
        return "\n".join(lines) + "\n"


# Argus ``ra`` binetflow CSV, the layout of the public CTU captures.
ARGUS_BINETFLOW = FlowSchema(
    columns={
        "start_time": "StartTime",
        "duration": "Dur",
        "protocol": "Proto",
        "src_ip": "SrcAddr",
        "src_port": "Sport",
        "dst_ip": "DstAddr",
        "dst_port": "Dport",
    },
    delimiter=",",
    timestamp_format="%Y/%m/%d %H:%M:%S.%f",
)

# Layout written by honeyprof.synthgen.
SIMPLE_CSV = FlowSchema(
    columns={
        "start_time": "start_time",
        "duration": "duration",
        "protocol": "protocol",
        "src_ip": "src_ip",
        "src_port": "src_port",
        "dst_ip": "dst_ip",
        "dst_port": "dst_port",
    },
    timestamp_format="iso",
)

PRESETS = {"argus": ARGUS_BINETFLOW, "simple": SIMPLE_CSV}


def _parse_time(value: str, fmt: str) -> datetime:
    value = value.strip()
    if fmt == "epoch":
        return datetime.fromtimestamp(float(value), tz=timezone.utc)
    ts = datetime.fromisoformat(value) if fmt == "iso" else datetime.strptime(value, fmt)
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _parse_port(value: str) -> int:
    value = value.strip()
    port = int(value, 16) if value.lower().startswith("0x") else int(value)
    if not 0 <= port <= 65535:
        raise ValueError(f"port out of range: {value}")
    return port


def _open_text(source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, Path)):
        try:
            return open(source, newline="", encoding="utf-8", errors="replace"), True
        except OSError as exc:
            raise IngestConfigError(f"cannot read {source}: {exc}") from exc
    if isinstance(source, io.TextIOBase):
        return source, False
    if hasattr(source, "read"):
        return io.TextIOWrapper(source, encoding="utf-8", errors="replace", newline=""), False
    raise IngestConfigError(f"unsupported flow source {source!r}")


def parse_flow_file(
    source,
    schema: FlowSchema = SIMPLE_CSV,
    report: IngestReport | None = None,
    file_index: int = 0,
) -> Iterator[FlowRecord]:
    """Yield one :class:`FlowRecord` per well-formed row, in file order.

    ``source`` is a path, a text stream or a byte stream.  Pass ``report``
    to collect row counters; it is updated as the generator advances.
    Columns the schema does not map are kept in ``extras``.
    """
    report = report if report is not None else IngestReport()
    fh, owned = _open_text(source)
    try:
        reader = csv.reader(fh, delimiter=schema.delimiter)
        header: list[str] | None = None
        if schema.has_header:
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                return
        index = {}
        for name, col in schema.columns.items():
            if isinstance(col, int):
                if header is not None and col >= len(header):
                    raise IngestConfigError(f"column index {col} for {name} beyond header")
                index[name] = col
            else:
                if col not in header:
                    raise IngestConfigError(f"column {col!r} for {name} not in header")
                index[name] = header.index(col)
        mapped = set(index.values())
        width = max(mapped) + 1

        for row_no, row in enumerate(reader):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            report.rows_read += 1
            try:
                if len(row) < width:
                    raise ValueError("short row")
                proto = row[index["protocol"]].strip().lower()
                src = str(ipaddress.IPv4Address(row[index["src_ip"]].strip()))
                dst = str(ipaddress.IPv4Address(row[index["dst_ip"]].strip()))
                dur_raw = row[index["duration"]].strip()
                duration = float(dur_raw) if dur_raw else 0.0
                extras = {}
                for i, value in enumerate(row):
                    if i not in mapped:
                        key = header[i] if header is not None and i < len(header) else str(i)
                        extras[key] = value
                if proto in SERVICE_PROTOCOLS:
                    sport = _parse_port(row[index["src_port"]])
                    dport = _parse_port(row[index["dst_port"]])
                else:
                    sport = dport = None
                    for k in ("src_port", "dst_port"):
                        raw = row[index[k]].strip()
                        if raw:
                            extras[k] = raw
                rec = FlowRecord(
                    start_time=_parse_time(row[index["start_time"]], schema.timestamp_format),
                    duration=duration,
                    protocol=proto,
                    src_ip=src,
                    dst_ip=dst,
                    src_port=sport,
                    dst_port=dport,
                    extras=extras,
                    order=(file_index, row_no),
                )
            except ValueError as exc:
                report.rows_malformed += 1
                log.debug("row %d malformed: %s", row_no, exc)
                continue
            report.rows_parsed += 1
            yield rec
    finally:
        if owned:
            fh.close()


def resolve_attacks(
    flows: Iterable[FlowRecord],
    registry: HoneypotRegistry,
    report: IngestReport | None = None,
) -> Iterator[Attack]:
    """Keep flows aimed at a honeypot, drop ARP, preserve input order."""
    report = report if report is not None else IngestReport()
    for flow in flows:
        if flow.protocol == "arp":
            report.rows_dropped_arp += 1
            continue
        hp = registry.id_for(flow.dst_ip)
        if hp is None:
            report.rows_dropped_unknown_dst += 1
            continue
        report.attacks_emitted += 1
        yield Attack(flow, hp)


def merge_attack_streams(*streams: Iterable[Attack]) -> Iterator[Attack]:
    """Merge per-file attack streams (each time-sorted) by ``(start_time, order)``."""
    return heapq.merge(*streams, key=lambda a: a.flow.sort_key)


@dataclass
class Ingestion:
    """Convenience bundle: parse several files and resolve them in one go."""

    registry: HoneypotRegistry
    schema: FlowSchema = SIMPLE_CSV
    report: IngestReport = field(default_factory=IngestReport)

    def attacks(self, sources: Iterable) -> Iterator[Attack]:
        for i, src in enumerate(sources):
            flows = parse_flow_file(src, self.schema, self.report, file_index=i)
            yield from resolve_attacks(flows, self.registry, self.report)
