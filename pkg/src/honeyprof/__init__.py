"""Attacker profiling and attack-order mining for distributed honeypot flow logs."""

from .flowcore import (
    Attack,
    AttackerSummary,
    FlowRecord,
    Honeypot,
    HoneypotRegistry,
    read_summaries,
    service_key,
    write_summaries,
)
from .ingest import ARGUS_BINETFLOW, SIMPLE_CSV, FlowSchema, IngestReport, parse_flow_file, resolve_attacks
from .metrics import aggregate, penetration_ratio, table_by_continent_and_H, table_by_H, table_by_S_and_H
from .profiler import Profile, classify, profile_matrix
from .seqmine import (
    build_sequence,
    build_sequences,
    count_patterns,
    filter_edges,
    filter_full_coverage,
    subseq_dtw,
    transition_graph,
)

__version__ = "0.1.0"
