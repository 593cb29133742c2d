"""Attack-order mining: honeypot sequences, categorical subsequence DTW,
permutation occurrence counts and transition graphs.

Honeypot ids are categorical, so the pointwise DTW cost is 0 for equal ids
and 1 otherwise.  All matching runs on run-length-collapsed sequences.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import quoteattr

import numpy as np

from .flowcore import Attack, HoneypotRegistry

MAX_PATTERN_LENGTH = 10


class PatternGuardError(ValueError):
    pass


def collapse(seq: Sequence[int]) -> tuple[list[int], list[int]]:
    """Drop consecutive repeats; returns (values, run lengths)."""
    values: list[int] = []
    runs: list[int] = []
    for x in seq:
        if values and values[-1] == x:
            runs[-1] += 1
        else:
            values.append(x)
            runs.append(1)
    return values, runs


@dataclass(frozen=True)
class HoneypotSequence:
    attacker_ip: str
    seq: tuple[int, ...]
    visit_counts: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.seq)

    @property
    def H(self) -> int:
        return len(set(self.seq))


def build_sequence(attacks: Sequence[Attack]) -> HoneypotSequence:
    """Collapsed honeypot-id sequence of one attacker's attacks.

    Attacks are (re)sorted by ``(start_time, order)``; the sort is stable so
    already-ordered input is untouched.
    """
    if not attacks:
        raise ValueError("an attacker sequence needs at least one attack")
    ordered = sorted(attacks, key=lambda a: a.flow.sort_key)
    ips = {a.flow.src_ip for a in ordered}
    if len(ips) != 1:
        raise ValueError(f"attacks from several sources: {sorted(ips)}")
    values, runs = collapse([a.honeypot_id for a in ordered])
    return HoneypotSequence(ordered[0].flow.src_ip, tuple(values), tuple(runs))


def build_sequences(attacks: Iterable[Attack]) -> dict[str, HoneypotSequence]:
    """Group a mixed attack stream by source and build every sequence."""
    per_ip: dict[str, list] = defaultdict(list)
    for a in attacks:
        per_ip[a.flow.src_ip].append((a.flow.sort_key, a.honeypot_id))
    out = {}
    for ip, items in per_ip.items():
        items.sort(key=lambda t: t[0])
        values, runs = collapse([hp for _, hp in items])
        out[ip] = HoneypotSequence(ip, tuple(values), tuple(runs))
    return out


def filter_full_coverage(
    sequences: Iterable[HoneypotSequence], registry: HoneypotRegistry | Iterable[int]
) -> list[HoneypotSequence]:
    ids = set(registry.ids if isinstance(registry, HoneypotRegistry) else registry)
    return [s for s in sequences if set(s.seq) >= ids]


def _seq_values(s) -> Sequence[int]:
    return s.seq if isinstance(s, HoneypotSequence) else s


# ---- distance -------------------------------------------------------------


def dtw_cost(query: Sequence[int], seq: Sequence[int]) -> int:
    """Subsequence DTW with 0/1 categorical cost on the sequence as given.

    Free start and end in ``seq``; steps are (1,0), (0,1) and (1,1).
    """
    if not query or not seq:
        raise ValueError("query and sequence must be non-empty")
    k = len(query)
    inf = math.inf
    prev = [inf] * k
    best = inf
    for x in seq:
        cur = [0] * k
        cur[0] = int(query[0] != x)
        for i in range(1, k):
            c = int(query[i] != x)
            cur[i] = c + min(prev[i], prev[i - 1], cur[i - 1])
        if cur[-1] < best:
            best = cur[-1]
            if best == 0:
                return 0
        prev = cur
    return best


def subseq_dtw(query: Sequence[int], seq: Sequence[int]) -> float:
    """Categorical subsequence DTW distance between ``query`` and ``seq``.

    ``seq`` is collapsed first.  On raw sequences, repeated mismatching
    elements would each add cost again, so only distance 0 would be
    invariant to how many times an attacker hit the same honeypot in a row.
    """
    return float(dtw_cost(query, collapse(seq)[0]))


# ---- pattern counting -----------------------------------------------------


def cyclic_class(pattern: Sequence[int]) -> tuple[int, ...]:
    """Lexicographically smallest rotation."""
    p = tuple(pattern)
    return min(p[i:] + p[:i] for i in range(len(p))) if p else p


@dataclass(frozen=True)
class PatternCount:
    pattern: tuple[int, ...]
    exact_count: int
    near_count: int
    cyclic_class: tuple[int, ...]


def _greedy_exact(seqs: list[list[int]], index: Mapping[tuple, int], k: int, counts: np.ndarray):
    for c in seqs:
        next_free: dict[int, int] = {}
        for i in range(len(c) - k + 1):
            p = index.get(tuple(c[i : i + k]))
            if p is not None and i >= next_free.get(p, 0):
                counts[p] += 1
                next_free[p] = i + k


def _greedy_near(seqs: list[list[int]], patterns: np.ndarray, threshold: float, counts: np.ndarray):
    """Earliest-ending non-overlapping matches at DTW cost <= threshold, all patterns at once."""
    n, k = patterns.shape
    for c in seqs:
        prev = np.full((n, k), np.inf)
        for x in c:
            cost = (patterns != x).astype(np.float64)
            cur = np.empty_like(prev)
            cur[:, 0] = cost[:, 0]
            for i in range(1, k):
                cur[:, i] = cost[:, i] + np.minimum(
                    np.minimum(prev[:, i], prev[:, i - 1]), cur[:, i - 1]
                )
            hit = cur[:, -1] <= threshold
            if hit.any():
                counts[hit] += 1
                cur[hit] = np.inf
            prev = cur


def count_patterns(
    sequences: Iterable,
    k: int,
    threshold: float = 0.0,
    ids: Iterable[int] | None = None,
    patterns: Iterable[Sequence[int]] | None = None,
) -> list[PatternCount]:
    """Occurrences of every length-``k`` arrangement of ``ids`` in the sequences.

    Occurrences are greedy, left to right and non-overlapping within each
    sequence, then summed.  ``exact_count`` uses distance 0 and
    ``near_count`` distance <= ``threshold``.  ``ids`` defaults to every id
    seen in the input; ``patterns`` restricts the candidate set instead.
    """
    seqs = [collapse(_seq_values(s))[0] for s in sequences]
    if patterns is not None:
        cands = [tuple(p) for p in patterns]
        if any(len(p) != k for p in cands):
            raise ValueError(f"all patterns must have length {k}")
        if any(a == b for p in cands for a, b in zip(p, p[1:])):
            raise ValueError("patterns must not repeat an id back to back")
    elif ids is None and not seqs:
        return []
    else:
        pool = sorted(set(ids) if ids is not None else {x for c in seqs for x in c})
        if k < 1:
            raise ValueError("pattern length must be positive")
        if k > MAX_PATTERN_LENGTH:
            raise PatternGuardError(f"k={k} exceeds the enumeration guard of {MAX_PATTERN_LENGTH}")
        if k > len(pool):
            raise ValueError(f"k={k} exceeds the {len(pool)} available honeypot ids")
        cands = list(itertools.permutations(pool, k))
    index = {p: i for i, p in enumerate(cands)}
    exact = np.zeros(len(cands), dtype=np.int64)
    _greedy_exact(seqs, index, k, exact)
    if threshold < 1:
        # integer costs: anything below 1 only admits exact matches
        near = exact.copy()
    else:
        near = np.zeros(len(cands), dtype=np.int64)
        if cands:
            _greedy_near(seqs, np.array(cands, dtype=np.int64), threshold, near)
    return [
        PatternCount(p, int(exact[i]), int(near[i]), cyclic_class(p))
        for i, p in enumerate(cands)
    ]


def pattern_family(pattern: Sequence[int]) -> set[tuple[int, ...]]:
    """All rotations of a pattern and of its reversal."""
    p = tuple(pattern)
    r = p[::-1]
    return {p[i:] + p[:i] for i in range(len(p))} | {r[i:] + r[:i] for i in range(len(r))}


@dataclass(frozen=True)
class FamilyShare:
    exact_matches: int
    exact_total: int
    near_matches: int
    near_total: int
    sequences: int

    @property
    def exact_pct(self) -> float:
        return 100.0 * self.exact_matches / self.exact_total if self.exact_total else 0.0

    @property
    def near_pct(self) -> float:
        return 100.0 * self.near_matches / self.near_total if self.near_total else 0.0


def family_share(counts: Sequence[PatternCount], pattern: Sequence[int], n_sequences: int = 0) -> FamilyShare:
    """Matches of a pattern family against all matches; both parts are kept."""
    fam = pattern_family(pattern)
    return FamilyShare(
        exact_matches=sum(c.exact_count for c in counts if c.pattern in fam),
        exact_total=sum(c.exact_count for c in counts),
        near_matches=sum(c.near_count for c in counts if c.pattern in fam),
        near_total=sum(c.near_count for c in counts),
        sequences=n_sequences,
    )


def rank_cyclic_classes(counts: Sequence[PatternCount], near: bool = False) -> list[tuple[tuple[int, ...], int]]:
    """Cyclic classes ordered by total occurrences, ties broken by class."""
    tot: Counter = Counter()
    for c in counts:
        tot[c.cyclic_class] += c.near_count if near else c.exact_count
    return sorted(tot.items(), key=lambda kv: (-kv[1], kv[0]))


def ip_order_patterns(registry: HoneypotRegistry) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(ascending, descending) honeypot-id orders by registry IP address."""
    asc = registry.ids_by_ip()
    return asc, asc[::-1]


def patterns_csv(counts: Sequence[PatternCount]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pattern", "cyclic_class", "exact_count", "near_count"])
    for c in counts:
        w.writerow(["-".join(map(str, c.pattern)), "-".join(map(str, c.cyclic_class)),
                    c.exact_count, c.near_count])
    return buf.getvalue()


# ---- transition graphs ----------------------------------------------------


@dataclass
class TransitionGraph:
    nodes: tuple[int, ...]
    edges: dict[tuple[int, int], int] = field(default_factory=dict)
    start: int | None = None

    @property
    def total_weight(self) -> int:
        return sum(self.edges.values())

    def weight(self, a: int, b: int) -> int:
        return self.edges.get((a, b), 0)

    def to_networkx(self):
        import networkx as nx

        g = nx.DiGraph(start=self.start)
        g.add_nodes_from(self.nodes)
        for (a, b), w in self.edges.items():
            g.add_edge(a, b, weight=w)
        return g

    def to_dot(self, name: str = "transitions") -> str:
        lines = [f"digraph {name} {{"]
        if self.start is not None:
            lines.append(f'  label="start {self.start}";')
        for n in self.nodes:
            lines.append(f'  {n} [label="{n}"];')
        for (a, b), w in sorted(self.edges.items()):
            lines.append(f'  {a} -> {b} [weight={w}, label="{w}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_gexf(self) -> str:
        """GEXF 1.2 with a ``weight`` attribute on every edge; no timestamps."""
        out = [
            '<?xml version="1.0" encoding="utf-8"?>',
            '<gexf xmlns="http://www.gexf.net/1.2draft" version="1.2">',
            '  <graph defaultedgetype="directed" mode="static">',
            "    <nodes>",
        ]
        out += [f"      <node id={quoteattr(str(n))} label={quoteattr(str(n))} />" for n in self.nodes]
        out += ["    </nodes>", "    <edges>"]
        for i, ((a, b), w) in enumerate(sorted(self.edges.items())):
            out.append(
                f'      <edge id="{i}" source={quoteattr(str(a))} target={quoteattr(str(b))} weight="{w}" />'
            )
        out += ["    </edges>", "  </graph>", "</gexf>"]
        return "\n".join(out) + "\n"


def _graph(seqs: Iterable[Sequence[int]], start: int | None = None) -> TransitionGraph:
    edges: Counter = Counter()
    nodes = set()
    for c in seqs:
        nodes.update(c)
        edges.update(zip(c, c[1:]))
    return TransitionGraph(tuple(sorted(nodes)), dict(sorted(edges.items())), start)


def transition_graph(sequences: Iterable, group_by_start: bool = False):
    """Weighted honeypot-to-honeypot transitions.

    With ``group_by_start`` returns ``{start_id: TransitionGraph}``.
    """
    seqs = [collapse(_seq_values(s))[0] for s in sequences]
    if not group_by_start:
        return _graph(seqs)
    groups: dict[int, list] = defaultdict(list)
    for c in seqs:
        groups[c[0]].append(c)
    return {start: _graph(g, start) for start, g in sorted(groups.items())}


def filter_edges(graph: TransitionGraph, min_weight: int) -> TransitionGraph:
    if min_weight < 1:
        raise ValueError("min_weight must be >= 1")
    edges = {e: w for e, w in graph.edges.items() if w >= min_weight}
    touched = {n for e in graph.edges for n in e}
    kept = {n for e in edges for n in e}
    # only nodes whose edges were all filtered away are dropped
    nodes = tuple(n for n in graph.nodes if n in kept or n not in touched)
    return TransitionGraph(nodes, edges, graph.start)
