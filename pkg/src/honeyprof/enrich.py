"""Offline enrichment: continent of origin, Tor exit nodes, benign scanners."""
from __future__ import annotations

import csv
import ipaddress
import logging
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator

from .flowcore import CONTINENTS, UNKNOWN_CONTINENT, AttackerSummary

log = logging.getLogger(__name__)

# Share of the world's Internet users per continent (percent), January 2023.
INTERNET_PENETRATION_2023 = {
    "AF": 11.2,
    "AS": 58.0,
    "EU": 13.9,
    "SA": 9.9,
    "NA": 6.5,
    "OC": 0.6,
}

_DATE_PREFIX = re.compile(r"^(\d{4})-(\d{2})-(\d{2})")


class EnrichmentError(ValueError):
    pass


class ContinentIndex:
    """Longest-prefix match of IPv4 addresses onto continent codes."""

    def __init__(self, ranges: Iterable[tuple[str, str]] = (), default: str = UNKNOWN_CONTINENT):
        self.default = default
        self._tables: dict[int, dict[int, str]] = {}
        self._lengths: list[int] = []
        for cidr, code in ranges:
            self.add(cidr, code)

    def add(self, cidr: str, code: str) -> None:
        net = ipaddress.IPv4Network(str(cidr).strip(), strict=False)
        code = code.strip().upper()
        if code not in CONTINENTS:
            raise EnrichmentError(f"unknown continent code {code!r}")
        plen = net.prefixlen
        key = int(net.network_address) >> (32 - plen) if plen else 0
        table = self._tables.setdefault(plen, {})
        prev = table.get(key)
        if prev is not None and prev != code:
            raise EnrichmentError(f"{net} mapped to both {prev} and {code}")
        table[key] = code
        self._lengths = sorted(self._tables, reverse=True)

    @property
    def ranges(self) -> list[tuple[str, str]]:
        out = []
        for plen, table in self._tables.items():
            for key, code in table.items():
                addr = ipaddress.IPv4Address(key << (32 - plen) if plen else 0)
                out.append((ipaddress.IPv4Network(f"{addr}/{plen}"), code))
        return [(str(n), c) for n, c in sorted(out)]

    def lookup(self, ip: str) -> str:
        value = int(ipaddress.IPv4Address(ip))
        for plen in self._lengths:
            code = self._tables[plen].get(value >> (32 - plen) if plen else 0)
            if code is not None:
                return code
        return self.default

    def __len__(self) -> int:
        return sum(len(t) for t in self._tables.values())


def load_continent_index(path: str | Path) -> ContinentIndex:
    """Read ``cidr,continent_code`` rows; ``#`` comments and a header are allowed."""
    index = ContinentIndex()
    with open(path, newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if row_no == 1 and row[0].strip().lower() == "cidr":
                continue
            if len(row) < 2:
                raise EnrichmentError(f"{path}:{row_no}: expected 'cidr,code'")
            try:
                index.add(row[0], row[1])
            except ValueError as exc:
                raise EnrichmentError(f"{path}:{row_no}: {exc}") from exc
    return index


@dataclass(frozen=True)
class IpSetIndex:
    ips: frozenset[str]
    label: str
    malformed: int = field(default=0, compare=False)

    def __contains__(self, ip: str) -> bool:
        return ip in self.ips

    def __len__(self) -> int:
        return len(self.ips)


def _read_ip_lines(path: Path) -> tuple[set[str], int]:
    ips, bad = set(), 0
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            token = line.split()
            # Tor bulk exit lists: "ExitAddress <ip> <date> <time>"
            if token[0] == "ExitAddress" and len(token) > 1:
                candidate = token[1]
            elif token[0] in ("ExitNode", "Published", "LastStatus"):
                continue
            else:
                candidate = token[0]
            try:
                ips.add(str(ipaddress.IPv4Address(candidate)))
            except ValueError:
                bad += 1
    return ips, bad


def file_date(path: str | Path) -> date | None:
    m = _DATE_PREFIX.match(Path(path).name)
    if not m:
        return None
    try:
        return date(int(m[1]), int(m[2]), int(m[3]))
    except ValueError:
        return None


def load_tor_exits(
    files: Iterable[str | Path] | str | Path,
    date_range: tuple[date | None, date | None] = (None, None),
) -> IpSetIndex:
    """Union daily exit-node lists whose filename date lies in ``date_range``.

    ``files`` may be a directory.  Bounds are inclusive; ``None`` is open.
    """
    if isinstance(files, (str, Path)) and Path(files).is_dir():
        files = sorted(p for p in Path(files).iterdir() if p.is_file())
    elif isinstance(files, (str, Path)):
        files = [files]
    lo, hi = date_range
    ips: set[str] = set()
    bad = 0
    for f in files:
        day = file_date(f)
        if day is None:
            log.warning("skipping Tor list without YYYY-MM-DD prefix: %s", f)
            continue
        if (lo is not None and day < lo) or (hi is not None and day > hi):
            continue
        got, b = _read_ip_lines(Path(f))
        ips |= got
        bad += b
    if not ips:
        log.warning("Tor exit index is empty")
    return IpSetIndex(frozenset(ips), "tor-exits", bad)


def load_benign_scanners(path: str | Path) -> IpSetIndex:
    ips, bad = _read_ip_lines(Path(path))
    if bad:
        log.info("%d malformed lines skipped in %s", bad, path)
    return IpSetIndex(frozenset(ips), "benign-scanners", bad)


EMPTY_TOR = IpSetIndex(frozenset(), "tor-exits")
EMPTY_BENIGN = IpSetIndex(frozenset(), "benign-scanners")


def load_penetration_table(path: str | Path) -> dict[str, float]:
    """Read ``continent,share`` rows (percent)."""
    table = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0].strip().lower() == "continent":
                continue
            code, share = row[0].strip().upper(), float(row[1])
            if code not in CONTINENTS:
                raise EnrichmentError(f"unknown continent code {code!r}")
            if share < 0:
                raise EnrichmentError(f"negative share for {code}")
            table[code] = share
    return table


def annotate(
    summaries: Iterable[AttackerSummary],
    continent: ContinentIndex | None = None,
    tor: IpSetIndex = EMPTY_TOR,
    benign: IpSetIndex = EMPTY_BENIGN,
) -> Iterator[AttackerSummary]:
    """Fill continent, Tor and benign-scanner fields; nothing else changes."""
    for s in summaries:
        code = continent.lookup(s.ip) if continent is not None else UNKNOWN_CONTINENT
        yield s.with_annotations(code, s.ip in tor, s.ip in benign)


def share_of(summaries: Iterable[AttackerSummary], flag: str) -> float:
    summaries = list(summaries)
    if not summaries:
        return 0.0
    return sum(bool(getattr(s, flag)) for s in summaries) / len(summaries)

