"""Attack order: sequences, subsequence DTW and transition graphs.

Driven attackers in the synthetic capture sweep the honeypots in ascending
or descending registry-IP order, or in a random order.  Counting every
permutation over the sequences of attackers that hit all honeypots brings
the two sweep orders to the top.
"""
from __future__ import annotations

from honeyprof.ingest import resolve_attacks
from honeyprof.profiler import Profile
from honeyprof.seqmine import (
    build_sequences,
    count_patterns,
    family_share,
    filter_edges,
    filter_full_coverage,
    ip_order_patterns,
    rank_cyclic_classes,
    subseq_dtw,
    transition_graph,
)
from honeyprof.synthgen import SynthConfig, generate

# Distance 0 ignores how often a honeypot is hit in a row and finds cyclic repeats.
print(subseq_dtw([8, 6, 3], [8, 8, 8, 6, 6, 6, 3, 3, 3]))
print(subseq_dtw([8, 6, 3], [8, 6, 3, 8, 6, 3, 8, 6, 3]))
# Two swapped honeypots at the end cost one mismatch.
print(subseq_dtw([7, 2, 6, 4, 5, 8, 1, 3], [7, 2, 6, 4, 5, 8, 3, 1]))

cfg = SynthConfig(
    seed=3,
    counts={Profile.CASUAL_FOCUSED: 100, Profile.DRIVEN_EXPLORER: 120},
    sweep_fractions={"ascending": 0.5, "descending": 0.2, "random": 0.3},
)
data = generate(cfg)
seqs = filter_full_coverage(build_sequences(resolve_attacks(data.flows, cfg.registry)).values(), cfg.registry)
print(f"\n{len(seqs)} attackers hit all {len(cfg.registry)} honeypots")

counts = count_patterns(seqs, len(cfg.registry), threshold=1.0)
asc, desc = ip_order_patterns(cfg.registry)
print("ascending IP order:", asc)
for cls, n in rank_cyclic_classes(counts)[:3]:
    print(f"  cyclic class {cls}: {n} exact matches")
share = family_share(counts, asc, len(seqs))
print(f"ascending family: {share.exact_matches}/{share.exact_total} exact, "
      f"{share.near_matches}/{share.near_total} within distance 1")

# Strong edges trace the sweep; the DOT text can be rendered with graphviz.
graph = filter_edges(transition_graph(seqs), min_weight=20)
print()
print(graph.to_dot())
