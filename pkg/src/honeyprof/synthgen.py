"""Labelled synthetic honeypot captures.

Every generated attacker is built to land in a known profile, and driven
attackers follow a known sweep order, so the whole pipeline can be checked
against ground truth.
"""
from __future__ import annotations

import csv
import io
import ipaddress
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .flowcore import FlowRecord, HoneypotRegistry
from .profiler import PROFILES, Profile

# RFC 2544 benchmarking space: never routed, never in real threat feeds.
ATTACKER_NET = ipaddress.IPv4Network("198.18.0.0/15")
STRAY_DST = "192.0.2.250"
DEFAULT_PORTS = (22, 23, 80, 443, 445, 1433, 2323, 3389, 5060, 5900, 8080, 8443)
PATTERNS = ("ascending", "descending", "random")

_CITIES = (
    "Amsterdam", "Bangalore", "Frankfurt", "London",
    "New York", "San Francisco", "Singapore", "Toronto",
)
# Registry IP ranks (0 = lowest) chosen so that ascending IP order is
# 7, 2, 6, 4, 5, 8, 1, 3.
_IP_RANK = {7: 0, 2: 1, 6: 2, 4: 3, 5: 4, 8: 5, 1: 6, 3: 7}


def default_registry() -> HoneypotRegistry:
    """Eight honeypots named after the reference deployment, on TEST-NET-3 addresses."""
    return HoneypotRegistry.from_rows(
        (i, f"Honeypot-Geo-{i}", _CITIES[i - 1], f"203.0.113.{10 * (_IP_RANK[i] + 1)}")
        for i in range(1, 9)
    )


def make_registry(n: int) -> HoneypotRegistry:
    """``n`` honeypots whose numeric IP order matches their id order."""
    if n < 1:
        raise ValueError("registry must hold at least one honeypot")
    if n > 250:
        raise ValueError("at most 250 synthetic honeypots")
    return HoneypotRegistry.from_rows(
        (i, f"hp{i}", f"city{i}", f"203.0.113.{i}") for i in range(1, n + 1)
    )


@dataclass
class SynthConfig:
    seed: int = 0
    registry: HoneypotRegistry | None = field(default_factory=default_registry)
    counts: dict[Profile, int] = field(
        default_factory=lambda: {p: 10 for p in PROFILES}
    )
    unclassified: int = 0
    attack_range: dict[Profile, tuple[int, int]] = field(
        default_factory=lambda: {p: (1, 12) for p in PROFILES}
    )
    port_pool: tuple[int, ...] = DEFAULT_PORTS
    max_services: int = 8
    sweep_fractions: dict[str, float] = field(
        default_factory=lambda: {"ascending": 0.4, "descending": 0.2, "random": 0.4}
    )
    start: datetime = datetime(2021, 4, 23, tzinfo=timezone.utc)
    window: timedelta = timedelta(days=40)
    arp_rows: int = 0
    stray_rows: int = 0

    def validate(self) -> None:
        if self.registry is None or len(self.registry) == 0:
            raise ValueError("synthetic data needs a non-empty registry")
        if any(n < 0 for n in self.counts.values()) or self.unclassified < 0:
            raise ValueError("attacker counts must be >= 0")
        if set(self.sweep_fractions) - set(PATTERNS):
            raise ValueError(f"sweep patterns are {PATTERNS}")
        if any(f < 0 for f in self.sweep_fractions.values()):
            raise ValueError("sweep fractions must be >= 0")
        if abs(sum(self.sweep_fractions.values()) - 1.0) > 1e-9:
            raise ValueError("sweep fractions must sum to 1")
        for p, (lo, hi) in self.attack_range.items():
            if lo < 1 or hi < lo:
                raise ValueError(f"bad attack range for {p}: {(lo, hi)}")
        explorers = self.counts.get(Profile.CASUAL_EXPLORER, 0) + self.counts.get(
            Profile.DRIVEN_EXPLORER, 0
        )
        if explorers and min(len(set(self.port_pool)), self.max_services) < 2:
            raise ValueError("explorer profiles need at least two ports")
        driven = self.counts.get(Profile.DRIVEN_FOCUSED, 0) + self.counts.get(
            Profile.DRIVEN_EXPLORER, 0
        )
        if driven and len(self.registry) < 2:
            raise ValueError("driven profiles need at least two honeypots")
        total = sum(self.counts.values()) + self.unclassified
        if total > ATTACKER_NET.num_addresses:
            raise ValueError("more attackers than synthetic source addresses")


@dataclass
class SynthData:
    flows: list[FlowRecord]
    labels: dict[str, tuple[str, str]]  # ip -> (profile, pattern)
    registry: HoneypotRegistry

    def flows_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["start_time", "duration", "protocol", "src_ip", "src_port", "dst_ip", "dst_port"])
        for f in self.flows:
            w.writerow([
                f.start_time.replace(tzinfo=None).isoformat(" ", "milliseconds"),
                f"{f.duration:.3f}", f.protocol, f.src_ip,
                "" if f.src_port is None else f.src_port,
                f.dst_ip,
                "" if f.dst_port is None else f.dst_port,
            ])
        return buf.getvalue()

    def labels_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["src_ip", "profile", "pattern"])
        for ip, (profile, pattern) in self.labels.items():
            w.writerow([ip, profile, pattern])
        return buf.getvalue()

    def write(self, out_dir: str | Path, stem: str = "synth") -> tuple[Path, Path, Path]:
        """Write ``<stem>_flows.csv``, ``<stem>_labels.csv`` and ``<stem>_registry.csv``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        flows, labels, reg = (out / f"{stem}_{n}.csv" for n in ("flows", "labels", "registry"))
        flows.write_text(self.flows_csv())
        labels.write_text(self.labels_csv())
        self.registry.write(reg)
        return flows, labels, reg


def read_labels(path: str | Path) -> dict[str, tuple[str, str]]:
    with open(path, newline="") as fh:
        return {r["src_ip"]: (r["profile"], r["pattern"]) for r in csv.DictReader(fh)}


def _distinct_times(rng: random.Random, n: int, window_ms: int) -> list[int]:
    """``n`` distinct sorted millisecond offsets in ``[0, window_ms)``."""
    span = window_ms - n + 1
    draws = sorted(int(rng.random() * span) for _ in range(n))
    return [t + i for i, t in enumerate(draws)]


def _split(rng: random.Random, n: int, parts: int) -> list[int]:
    """Random composition of ``n`` into ``parts`` positive integers."""
    if parts == 1:
        return [n]
    bounds = [0, *sorted(rng.sample(range(1, n), parts - 1)), n]
    return [b - a for a, b in zip(bounds, bounds[1:])]


def generate(config: SynthConfig) -> SynthData:
    """Deterministic, labelled capture for ``config``; flows come out time-sorted."""
    config.validate()
    # stdlib RNG: the per-attacker draws are tiny and numpy's call overhead dominates
    rng = random.Random(config.seed)
    reg = config.registry
    ids = list(reg.ids)
    asc = list(reg.ids_by_ip())
    window_ms = int(config.window.total_seconds() * 1000)
    ports = sorted(set(config.port_pool))
    max_s = min(len(ports), config.max_services)
    n_hp = len(ids)
    base = int(ATTACKER_NET.network_address)
    dst_ip = {hp: reg.ip_of(hp) for hp in ids}

    plan: list[Profile] = []
    for p in PROFILES:
        plan += [p] * config.counts.get(p, 0)
    plan += [Profile.UNCLASSIFIED] * config.unclassified
    rng.shuffle(plan)
    addrs = rng.sample(range(ATTACKER_NET.num_addresses), len(plan))

    pat_names = [p for p in PATTERNS if config.sweep_fractions.get(p, 0) > 0]
    pat_weights = [config.sweep_fractions[p] for p in pat_names]

    # (ms, tie-break, protocol, src, src port, dst, dst port)
    rows: list[tuple] = []
    labels: dict[int, tuple[str, str]] = {}
    for k, profile in enumerate(plan):
        ip = str(ipaddress.IPv4Address(base + addrs[k]))
        pattern = "none"
        if profile is Profile.UNCLASSIFIED:
            targets = rng.sample(ids, rng.randint(1, n_hp))
            s = 0
            lo, hi = 1, 12
        else:
            lo, hi = config.attack_range.get(profile, (1, 12))
            if profile.driven:
                pattern = rng.choices(pat_names, pat_weights)[0]
                if pattern == "ascending":
                    targets = asc
                elif pattern == "descending":
                    targets = asc[::-1]
                else:
                    targets = rng.sample(ids, rng.randint(2, n_hp))
            else:
                targets = [rng.choice(ids)]
            explorer = profile in (Profile.CASUAL_EXPLORER, Profile.DRIVEN_EXPLORER)
            s = rng.randint(2, max_s) if explorer else 1
        need = max(len(targets), s, 1)
        n = rng.randint(max(lo, need), max(hi, need))
        times = _distinct_times(rng, n, window_ms)
        hp_of = [hp for hp, r in zip(targets, _split(rng, n, len(targets))) for _ in range(r)]
        if s:
            chosen = rng.sample(ports, s)
            port_of = chosen + rng.choices(chosen, k=n - s)
            rng.shuffle(port_of)
            for t, hp, port in zip(times, hp_of, port_of):
                proto = "udp" if rng.random() < 0.15 else "tcp"
                sport = 1024 + int(rng.random() * 64512)
                rows.append((t, len(rows), proto, ip, sport, dst_ip[hp], port))
        else:
            for t, hp in zip(times, hp_of):
                rows.append((t, len(rows), "icmp", ip, None, dst_ip[hp], None))
        labels[base + addrs[k]] = (profile.value, pattern)

    for _ in range(config.arp_rows):
        rows.append((rng.randrange(window_ms), len(rows), "arp", f"10.0.0.{rng.randint(1, 254)}",
                     None, reg.ip_of(rng.choice(ids)), None))
    for _ in range(config.stray_rows):
        src = str(ipaddress.IPv4Address(base + rng.randrange(ATTACKER_NET.num_addresses)))
        rows.append((rng.randrange(window_ms), len(rows), "tcp", src,
                     rng.randrange(1024, 65536), STRAY_DST, 80))

    rows.sort()
    flows = [
        FlowRecord(
            start_time=config.start + timedelta(milliseconds=ms),
            duration=0.0,
            protocol=proto,
            src_ip=src,
            dst_ip=dst,
            src_port=sport,
            dst_port=dport,
            order=(0, i),
        )
        for i, (ms, _, proto, src, sport, dst, dport) in enumerate(rows)
    ]
    ordered = {str(ipaddress.IPv4Address(a)): labels[a] for a in sorted(labels)}
    return SynthData(flows, ordered, reg)


def random_config(seed: int, max_attackers: int = 5000, registry: HoneypotRegistry | None = None) -> SynthConfig:
    """A randomised but valid config, for property-style round-trip checks."""
    rng = np.random.default_rng(seed)
    reg = registry or (default_registry() if rng.random() < 0.5 else make_registry(int(rng.integers(2, 9))))
    total = int(rng.integers(1, max_attackers + 1))
    shares = rng.dirichlet(np.ones(5))
    counts = rng.multinomial(total, shares)
    fr = rng.dirichlet(np.ones(3))
    pool_size = int(rng.integers(2, len(DEFAULT_PORTS) + 1))
    return SynthConfig(
        seed=int(rng.integers(0, 2**31)),
        registry=reg,
        counts={p: int(c) for p, c in zip(PROFILES, counts[:4])},
        unclassified=int(counts[4]),
        attack_range={p: (int(lo), int(lo + rng.integers(0, 15))) for p, lo in zip(PROFILES, rng.integers(1, 6, size=4))},
        port_pool=tuple(int(x) for x in rng.choice(DEFAULT_PORTS, size=pool_size, replace=False)),
        sweep_fractions=dict(zip(PATTERNS, (float(x) for x in fr))),
        arp_rows=int(rng.integers(0, 20)),
        stray_rows=int(rng.integers(0, 20)),
    )
