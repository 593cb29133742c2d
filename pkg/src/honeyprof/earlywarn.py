"""Honeypots as early-warning sensors for a production host.

One honeypot of the dataset plays the production server.  An attacker that
reaches it counts as *covered* by a sensor set when its first sighting on any
sensor strictly precedes its first attack on production.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .flowcore import Attack, AttackerSummary, HoneypotRegistry
from .profiler import Profile, classify

MAX_HONEYPOTS = 16


class EarlyWarningError(ValueError):
    pass


@dataclass(frozen=True)
class WarningReport:
    sensors: tuple[int, ...]
    production: int
    attackers_on_production: int
    driven_on_production: int
    covered_all: int
    covered_driven: int
    coverage_all: float | None
    coverage_driven: float | None
    lead_min_s: float | None
    lead_median_s: float | None
    lead_max_s: float | None


class SightingTable:
    """First-sighting time (epoch seconds) of every attacker on every honeypot."""

    def __init__(self, ips: list[str], first: np.ndarray, ids: tuple[int, ...], profiles: Mapping[str, Profile]):
        self.ips = ips
        self.first = first  # shape (attackers, honeypots), inf where never seen
        self.ids = ids
        self.profiles = profiles
        self._col = {hp: i for i, hp in enumerate(ids)}
        self.driven = np.array([profiles.get(ip, Profile.UNCLASSIFIED).driven for ip in ips], dtype=bool)

    @classmethod
    def from_attacks(
        cls,
        attacks: Iterable[Attack],
        registry: HoneypotRegistry,
        summaries: Mapping[str, AttackerSummary] | None = None,
    ) -> "SightingTable":
        """Build from an attack stream; profiles come from ``summaries`` when given,
        otherwise from the stream itself."""
        ids = registry.ids
        col = {hp: i for i, hp in enumerate(ids)}
        row: dict[str, int] = {}
        firsts: list[list[float]] = []
        if summaries is None:
            from .metrics import aggregate

            attacks = list(attacks)
            summaries = aggregate(attacks)
        for a in attacks:
            r = row.get(a.flow.src_ip)
            if r is None:
                r = row[a.flow.src_ip] = len(firsts)
                firsts.append([math.inf] * len(ids))
            t = a.flow.start_time.timestamp()
            c = col[a.honeypot_id]
            if t < firsts[r][c]:
                firsts[r][c] = t
        ips = list(row)
        profiles = {ip: classify(summaries[ip]) for ip in ips if ip in summaries}
        first = np.array(firsts, dtype=np.float64).reshape(len(ips), len(ids))
        return cls(ips, first, ids, profiles)

    def column(self, hp: int) -> int:
        try:
            return self._col[hp]
        except KeyError:
            raise EarlyWarningError(f"honeypot {hp} is not in the registry") from None


def _frac(num: int, den: int) -> float | None:
    return num / den if den else None


def evaluate(data: SightingTable, sensors: Iterable[int], production: int) -> WarningReport:
    sensors = tuple(sorted(set(sensors)))
    if not sensors:
        raise EarlyWarningError("at least one sensor is required")
    pcol = data.column(production)
    if production in sensors:
        raise EarlyWarningError("the production host cannot also be a sensor")
    scols = [data.column(s) for s in sensors]

    prod_t = data.first[:, pcol]
    on_prod = np.isfinite(prod_t)
    seen_t = data.first[:, scols].min(axis=1)
    covered = on_prod & (seen_t < prod_t)
    lead = prod_t[covered] - seen_t[covered]

    n_all = int(on_prod.sum())
    n_driven = int((on_prod & data.driven).sum())
    c_all = int(covered.sum())
    c_driven = int((covered & data.driven).sum())
    return WarningReport(
        sensors=sensors,
        production=production,
        attackers_on_production=n_all,
        driven_on_production=n_driven,
        covered_all=c_all,
        covered_driven=c_driven,
        coverage_all=_frac(c_all, n_all),
        coverage_driven=_frac(c_driven, n_driven),
        lead_min_s=float(lead.min()) if lead.size else None,
        lead_median_s=float(np.median(lead)) if lead.size else None,
        lead_max_s=float(lead.max()) if lead.size else None,
    )


@dataclass(frozen=True)
class SensorSweep:
    production: int
    reports: list[WarningReport]
    target: float
    minimal_k: int | None
    best_sensors: tuple[int, ...] | None


def _rank(r: WarningReport):
    return (
        -(r.coverage_driven or 0.0),
        -(r.lead_median_s or 0.0),
        r.sensors,
    )


def sweep_sensor_sets(
    data: SightingTable, production: int, k_max: int, target: float = 1.0
) -> SensorSweep:
    """Evaluate every sensor subset of size 1..k_max.

    ``minimal_k`` is the smallest size at which some subset reaches
    ``coverage_driven >= target``; among those, ``best_sensors`` has the
    longest median lead time.
    """
    n = len(data.ids)
    if n > MAX_HONEYPOTS:
        raise EarlyWarningError(f"{n} honeypots exceed the subset-sweep guard of {MAX_HONEYPOTS}")
    data.column(production)
    if not 1 <= k_max <= n - 1:
        raise EarlyWarningError(f"k_max must be in 1..{n - 1}")
    others = [hp for hp in data.ids if hp != production]
    reports = [
        evaluate(data, combo, production)
        for k in range(1, k_max + 1)
        for combo in itertools.combinations(others, k)
    ]
    minimal_k = best = None
    for k in range(1, k_max + 1):
        hits = [
            r for r in reports
            if len(r.sensors) == k and r.coverage_driven is not None and r.coverage_driven >= target
        ]
        if hits:
            minimal_k = k
            best = min(hits, key=_rank).sensors
            break
    return SensorSweep(production, reports, target, minimal_k, best)


def _fmt(v) -> str:
    if v is None:
        return "undefined"
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def reports_csv(reports: Iterable[WarningReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sensors", "production", "coverage_all", "coverage_driven",
                "lead_min_s", "lead_median_s", "lead_max_s"])
    for r in reports:
        w.writerow([
            "-".join(map(str, r.sensors)), r.production, _fmt(r.coverage_all),
            _fmt(r.coverage_driven), _fmt(r.lead_min_s), _fmt(r.lead_median_s), _fmt(r.lead_max_s),
        ])
    return buf.getvalue()
