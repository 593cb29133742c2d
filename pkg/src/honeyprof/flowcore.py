"""Shared domain types: flows, the honeypot registry, attacks and attacker summaries.

An *attack* is any flow whose destination address is a honeypot, the
*attacker* is its source address and a *service* is the destination port of a
TCP or UDP attack.  Everything downstream consumes these definitions.
"""
from __future__ import annotations

import csv
import ipaddress
import json
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Iterable, Mapping

SERVICE_PROTOCOLS = frozenset({"tcp", "udp"})
CONTINENTS = ("AF", "AS", "EU", "NA", "OC", "SA", "AN", "ZZ")
UNKNOWN_CONTINENT = "ZZ"


class RegistryError(ValueError):
    pass


def _check_ipv4(value: str) -> str:
    return str(ipaddress.IPv4Address(value.strip()))


@dataclass(frozen=True)
class FlowRecord:
    """One bidirectional flow as read from a capture.

    ``order`` is ``(file_index, row_index)`` and breaks timestamp ties.
    """

    start_time: datetime
    duration: float
    protocol: str
    src_ip: str
    dst_ip: str
    src_port: int | None = None
    dst_port: int | None = None
    extras: Mapping[str, str] = field(default_factory=dict, compare=False)
    order: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError(f"negative duration {self.duration}")
        sp, dp = self.src_port, self.dst_port
        if self.protocol in SERVICE_PROTOCOLS:
            if sp is None or dp is None:
                raise ValueError(f"{self.protocol} flow without ports")
            if not (0 <= sp <= 65535 and 0 <= dp <= 65535):
                raise ValueError(f"port out of range: {sp}/{dp}")
        elif sp is not None or dp is not None:
            raise ValueError(f"{self.protocol} flow carries ports")

    @property
    def sort_key(self) -> tuple[datetime, tuple[int, int]]:
        return (self.start_time, self.order)


def service_key(flow: FlowRecord) -> int | None:
    """Destination port for TCP/UDP flows, ``None`` for every other protocol."""
    if flow.protocol in SERVICE_PROTOCOLS:
        return flow.dst_port
    return None


@dataclass(frozen=True)
class Honeypot:
    honeypot_id: int
    name: str
    city: str
    ip: str


@dataclass(frozen=True)
class HoneypotRegistry:
    entries: tuple[Honeypot, ...]

    def __post_init__(self):
        if not self.entries:
            raise RegistryError("registry is empty")
        ids = sorted(h.honeypot_id for h in self.entries)
        if ids != list(range(1, len(ids) + 1)):
            raise RegistryError(f"honeypot ids must be dense 1..N, got {ids}")
        ips = [h.ip for h in self.entries]
        if len(set(ips)) != len(ips):
            raise RegistryError("duplicate honeypot IP in registry")
        object.__setattr__(
            self, "entries", tuple(sorted(self.entries, key=lambda h: h.honeypot_id))
        )
        object.__setattr__(self, "_by_ip", {h.ip: h.honeypot_id for h in self.entries})

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[int, str, str, str]]) -> "HoneypotRegistry":
        return cls(tuple(Honeypot(int(i), n, c, _check_ipv4(ip)) for i, n, c, ip in rows))

    @classmethod
    def load(cls, path: str | Path) -> "HoneypotRegistry":
        """Read a ``honeypot_id,name,city,ip`` CSV."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = {"honeypot_id", "name", "city", "ip"} - set(reader.fieldnames or ())
            if missing:
                raise RegistryError(f"registry file lacks columns: {sorted(missing)}")
            try:
                return cls.from_rows(
                    (r["honeypot_id"], r["name"], r["city"], r["ip"]) for r in reader
                )
            except ValueError as exc:
                raise RegistryError(str(exc)) from exc

    def write(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["honeypot_id", "name", "city", "ip"])
            for h in self.entries:
                w.writerow([h.honeypot_id, h.name, h.city, h.ip])

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(h.honeypot_id for h in self.entries)

    def id_for(self, ip: str) -> int | None:
        return self._by_ip.get(ip)

    def ip_of(self, honeypot_id: int) -> str:
        return self.entries[honeypot_id - 1].ip

    def ids_by_ip(self) -> tuple[int, ...]:
        """Honeypot ids sorted by numeric IP address, lowest first."""
        return tuple(
            h.honeypot_id
            for h in sorted(self.entries, key=lambda h: ipaddress.IPv4Address(h.ip))
        )


@dataclass(frozen=True)
class Attack:
    flow: FlowRecord
    honeypot_id: int

    @property
    def src_ip(self) -> str:
        return self.flow.src_ip


@dataclass(frozen=True)
class AttackerSummary:
    """Per-source aggregate.  ``H`` and ``S`` are derived from the sets."""

    ip: str
    attack_count: int
    honeypots: frozenset[int]
    ports: frozenset[int]
    first_seen: datetime
    last_seen: datetime
    per_honeypot_counts: Mapping[int, int]
    continent: str = UNKNOWN_CONTINENT
    is_tor: bool = False
    is_benign_scanner: bool = False

    @property
    def H(self) -> int:
        return len(self.honeypots)

    @property
    def S(self) -> int:
        return len(self.ports)

    @classmethod
    def from_attack(cls, attack: Attack) -> "AttackerSummary":
        port = service_key(attack.flow)
        t = attack.flow.start_time
        return cls(
            ip=attack.flow.src_ip,
            attack_count=1,
            honeypots=frozenset({attack.honeypot_id}),
            ports=frozenset() if port is None else frozenset({port}),
            first_seen=t,
            last_seen=t,
            per_honeypot_counts={attack.honeypot_id: 1},
        )

    def merge(self, other: "AttackerSummary") -> "AttackerSummary":
        """Combine two partial summaries of the same attacker."""
        if other.ip != self.ip:
            raise ValueError(f"cannot merge summaries of {self.ip} and {other.ip}")
        counts = dict(self.per_honeypot_counts)
        for hp, n in other.per_honeypot_counts.items():
            counts[hp] = counts.get(hp, 0) + n
        known = [c for c in (self.continent, other.continent) if c != UNKNOWN_CONTINENT]
        return AttackerSummary(
            ip=self.ip,
            attack_count=self.attack_count + other.attack_count,
            honeypots=self.honeypots | other.honeypots,
            ports=self.ports | other.ports,
            first_seen=min(self.first_seen, other.first_seen),
            last_seen=max(self.last_seen, other.last_seen),
            per_honeypot_counts=dict(sorted(counts.items())),
            continent=min(known) if known else UNKNOWN_CONTINENT,
            is_tor=self.is_tor or other.is_tor,
            is_benign_scanner=self.is_benign_scanner or other.is_benign_scanner,
        )

    def with_annotations(self, continent: str, is_tor: bool, is_benign_scanner: bool):
        return replace(
            self, continent=continent, is_tor=is_tor, is_benign_scanner=is_benign_scanner
        )


# ---- summary artifact: one JSON object per line ---------------------------


def summary_to_dict(s: AttackerSummary) -> dict:
    return {
        "ip": s.ip,
        "attack_count": s.attack_count,
        "honeypots": sorted(s.honeypots),
        "ports": sorted(s.ports),
        "first_seen": s.first_seen.isoformat(),
        "last_seen": s.last_seen.isoformat(),
        "per_honeypot_counts": {str(k): v for k, v in sorted(s.per_honeypot_counts.items())},
        "continent": s.continent,
        "is_tor": s.is_tor,
        "is_benign_scanner": s.is_benign_scanner,
    }


def summary_from_dict(d: dict) -> AttackerSummary:
    return AttackerSummary(
        ip=d["ip"],
        attack_count=int(d["attack_count"]),
        honeypots=frozenset(int(x) for x in d["honeypots"]),
        ports=frozenset(int(x) for x in d["ports"]),
        first_seen=datetime.fromisoformat(d["first_seen"]),
        last_seen=datetime.fromisoformat(d["last_seen"]),
        per_honeypot_counts={int(k): int(v) for k, v in d["per_honeypot_counts"].items()},
        continent=d.get("continent", UNKNOWN_CONTINENT),
        is_tor=bool(d.get("is_tor", False)),
        is_benign_scanner=bool(d.get("is_benign_scanner", False)),
    )


def write_summaries(summaries: Mapping[str, AttackerSummary], path: str | Path) -> None:
    """Line-delimited JSON, sorted by numeric IP so reruns are byte-identical."""
    with open(path, "w") as fh:
        for ip in sorted(summaries, key=ipaddress.IPv4Address):
            fh.write(json.dumps(summary_to_dict(summaries[ip]), sort_keys=True) + "\n")


def read_summaries(path: str | Path) -> dict[str, AttackerSummary]:
    out = {}
    with open(path) as fh:
        for line in fh:
            if line.strip():
                s = summary_from_dict(json.loads(line))
                out[s.ip] = s
    return out
