"""Attacker aggregation and the disaggregated H / S / continent tables.

Percentages are always over the dataset-wide totals.  Per-group spread uses
the sample standard deviation (``n - 1``); single-member groups report 0.
"""
from __future__ import annotations

import csv
import io
import json
import math
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .flowcore import CONTINENTS, SERVICE_PROTOCOLS, Attack, AttackerSummary

S_BUCKETS = ("1", "2", "3", "4", "5", ">5")
UNDEFINED = "undefined"


def s_bucket(s: int) -> str | None:
    """Bucket label for S, ``None`` for attackers with no TCP/UDP service."""
    if s <= 0:
        return None
    return str(s) if s <= 5 else ">5"


class _Acc:
    __slots__ = ("count", "honeypots", "ports", "first", "last", "per_hp")

    def __init__(self, t):
        self.count = 0
        self.honeypots = set()
        self.ports = set()
        self.first = self.last = t
        self.per_hp = {}


def aggregate(attacks: Iterable[Attack]) -> dict[str, AttackerSummary]:
    """One summary per source address, in a single streaming pass."""
    accs: dict[str, _Acc] = {}
    for a in attacks:
        flow = a.flow
        acc = accs.get(flow.src_ip)
        if acc is None:
            acc = accs[flow.src_ip] = _Acc(flow.start_time)
        acc.count += 1
        acc.honeypots.add(a.honeypot_id)
        acc.per_hp[a.honeypot_id] = acc.per_hp.get(a.honeypot_id, 0) + 1
        if flow.protocol in SERVICE_PROTOCOLS:
            acc.ports.add(flow.dst_port)
        t = flow.start_time
        if t < acc.first:
            acc.first = t
        elif t > acc.last:
            acc.last = t
    return {
        ip: AttackerSummary(
            ip=ip,
            attack_count=acc.count,
            honeypots=frozenset(acc.honeypots),
            ports=frozenset(acc.ports),
            first_seen=acc.first,
            last_seen=acc.last,
            per_honeypot_counts=dict(sorted(acc.per_hp.items())),
        )
        for ip, acc in accs.items()
    }


def merge_summaries(*parts: Mapping[str, AttackerSummary]) -> dict[str, AttackerSummary]:
    out: dict[str, AttackerSummary] = {}
    for part in parts:
        for ip, s in part.items():
            out[ip] = out[ip].merge(s) if ip in out else s
    return out


def group_stats(counts: Sequence[int]) -> tuple[float, float, float]:
    """(mean, sample std, median) of per-attacker attack counts."""
    if not counts:
        return 0.0, 0.0, 0.0
    mean = statistics.fmean(counts)
    std = statistics.stdev(counts) if len(counts) > 1 else 0.0
    return mean, std, float(statistics.median(counts))


def _pct(part: int, total: int) -> float:
    return 100.0 * part / total if total else 0.0


@dataclass(frozen=True)
class StatRow:
    key: object
    attacker_count: int
    attack_count: int
    attacker_pct: float
    attack_pct: float
    avg_attacks_per_attacker: float
    std_attacks_per_attacker: float
    median_attacks_per_attacker: float


STAT_COLUMNS = tuple(StatRow.__dataclass_fields__)


def _stat_rows(groups: Mapping[object, list[int]], n_attackers: int, n_attacks: int):
    rows = []
    for key, counts in groups.items():
        avg, std, med = group_stats(counts)
        rows.append(
            StatRow(
                key=key,
                attacker_count=len(counts),
                attack_count=sum(counts),
                attacker_pct=_pct(len(counts), n_attackers),
                attack_pct=_pct(sum(counts), n_attacks),
                avg_attacks_per_attacker=avg,
                std_attacks_per_attacker=std,
                median_attacks_per_attacker=med,
            )
        )
    return rows


def _values(summaries) -> list[AttackerSummary]:
    if isinstance(summaries, Mapping):
        return list(summaries.values())
    return list(summaries)


def table_by_H(summaries, n_honeypots: int) -> list[StatRow]:
    """One row per H in ``1..n_honeypots``, empty groups included."""
    summaries = _values(summaries)
    groups: dict[int, list[int]] = {h: [] for h in range(1, n_honeypots + 1)}
    for s in summaries:
        groups[s.H].append(s.attack_count)
    return _stat_rows(
        groups, len(summaries), sum(s.attack_count for s in summaries)
    )


def table_by_S(summaries) -> list[StatRow]:
    """One row per S bucket; S=0 attackers are left out but stay in the denominators."""
    summaries = _values(summaries)
    groups: dict[str, list[int]] = {b: [] for b in S_BUCKETS}
    for s in summaries:
        b = s_bucket(s.S)
        if b is not None:
            groups[b].append(s.attack_count)
    return _stat_rows(groups, len(summaries), sum(s.attack_count for s in summaries))


@dataclass
class Matrix:
    """Two-way table of percentages with fixed row/column order."""

    name: str
    rows: tuple
    cols: tuple
    cells: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.cells.get(key, 0.0)

    def row_total(self, r) -> float:
        return sum(self[(r, c)] for c in self.cols)

    def col_total(self, c) -> float:
        return sum(self[(r, c)] for r in self.rows)

    def total(self) -> float:
        return sum(self.cells.values())


def _weight(s: AttackerSummary, weight: str) -> int:
    if weight == "attackers":
        return 1
    if weight == "attacks":
        return s.attack_count
    raise ValueError(f"weight must be 'attackers' or 'attacks', not {weight!r}")


def table_by_S_and_H(summaries, n_honeypots: int, weight: str = "attackers") -> Matrix:
    """Percent of all attackers (or attacks) per (H, S bucket).

    S=0 attackers are excluded from the cells but counted in the total, so
    the cells plus :func:`s_zero_share` add to 100.
    """
    summaries = _values(summaries)
    total = sum(_weight(s, weight) for s in summaries)
    m = Matrix(f"{weight}_by_S_and_H", tuple(range(1, n_honeypots + 1)), S_BUCKETS)
    counts: dict = {}
    for s in summaries:
        b = s_bucket(s.S)
        if b is not None:
            counts[(s.H, b)] = counts.get((s.H, b), 0) + _weight(s, weight)
    m.cells = {(h, b): _pct(counts.get((h, b), 0), total) for h in m.rows for b in m.cols}
    return m


def s_zero_share(summaries, weight: str = "attackers") -> float:
    summaries = _values(summaries)
    total = sum(_weight(s, weight) for s in summaries)
    return _pct(sum(_weight(s, weight) for s in summaries if s.S == 0), total)


def stats_by_S_and_H(summaries, n_honeypots: int) -> dict[tuple[int, str], tuple[float, float, float]]:
    """(avg, std, median) of attacks per attacker for each (H, S bucket) cell."""
    groups: dict = {(h, b): [] for h in range(1, n_honeypots + 1) for b in S_BUCKETS}
    for s in _values(summaries):
        b = s_bucket(s.S)
        if b is not None:
            groups[(s.H, b)].append(s.attack_count)
    return {k: group_stats(v) for k, v in groups.items()}


def table_by_continent_and_H(summaries, n_honeypots: int, weight: str = "attackers") -> Matrix:
    """Percent of all attackers (or attacks) per (continent, H)."""
    summaries = _values(summaries)
    total = sum(_weight(s, weight) for s in summaries)
    m = Matrix(f"{weight}_by_continent_and_H", CONTINENTS, tuple(range(1, n_honeypots + 1)))
    counts: dict = {}
    for s in summaries:
        counts[(s.continent, s.H)] = counts.get((s.continent, s.H), 0) + _weight(s, weight)
    m.cells = {(c, h): _pct(counts.get((c, h), 0), total) for c in m.rows for h in m.cols}
    return m


def continent_shares(summaries, weight: str = "attackers") -> dict[str, float]:
    summaries = _values(summaries)
    total = sum(_weight(s, weight) for s in summaries)
    counts = dict.fromkeys(CONTINENTS, 0)
    for s in summaries:
        counts[s.continent] += _weight(s, weight)
    return {c: _pct(n, total) for c, n in counts.items()}


def penetration_ratio(
    observed_share: Mapping[str, float], table: Mapping[str, float]
) -> dict[str, float | str]:
    """Observed over expected share per continent.

    Continents missing from ``table`` (or with expected 0) yield ``UNDEFINED``
    unless nothing was observed, in which case the ratio is 0.
    """
    out: dict[str, float | str] = {}
    for code, obs in observed_share.items():
        exp = table.get(code, 0.0)
        if obs == 0:
            out[code] = 0.0
        elif exp <= 0:
            out[code] = UNDEFINED
        else:
            out[code] = obs / exp
    return out


def fmt2(x) -> str:
    if isinstance(x, str):
        return x
    return f"{x:.2f}"


# ---- emitters -------------------------------------------------------------


def _round(v):
    if isinstance(v, float):
        if math.isnan(v):
            return None
        return round(v, 2)
    return v


def _cell(v):
    return fmt2(v) if isinstance(v, float) else v


def stat_rows_csv(rows: Sequence[StatRow], key_name: str = "key") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((key_name,) + STAT_COLUMNS[1:])
    for r in rows:
        w.writerow([r.key, *(_cell(getattr(r, c)) for c in STAT_COLUMNS[1:])])
    return buf.getvalue()


def stat_rows_json(rows: Sequence[StatRow], key_name: str = "key") -> str:
    records = [
        {key_name: r.key, **{c: _round(getattr(r, c)) for c in STAT_COLUMNS[1:]}}
        for r in rows
    ]
    return json.dumps(records, indent=2) + "\n"


def matrix_csv(m: Matrix, row_name: str = "row") -> str:
    """Rows in fixed order, one column per column key, then a ``Total`` row/col."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([row_name, *m.cols, "Total"])
    for r in m.rows:
        w.writerow([r, *(fmt2(m[(r, c)]) for c in m.cols), fmt2(m.row_total(r))])
    w.writerow(["Total", *(fmt2(m.col_total(c)) for c in m.cols), fmt2(m.total())])
    return buf.getvalue()


def matrix_json(m: Matrix) -> str:
    return json.dumps(
        {
            "name": m.name,
            "rows": [str(r) for r in m.rows],
            "cols": [str(c) for c in m.cols],
            "cells": [[_round(m[(r, c)]) for c in m.cols] for r in m.rows],
        },
        indent=2,
    ) + "\n"
