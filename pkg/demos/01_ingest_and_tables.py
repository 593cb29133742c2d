"""From a flow log to the H and S tables.

Generates a small labelled capture, writes it as CSV, reads it back through
the ingest layer and prints the per-H table and the S x H attacker matrix.
"""
from __future__ import annotations

import tempfile
from pathlib import Path

from honeyprof.flowcore import HoneypotRegistry
from honeyprof.ingest import IngestReport, parse_flow_file, resolve_attacks
from honeyprof.metrics import aggregate, matrix_csv, s_zero_share, stat_rows_csv, table_by_H, table_by_S_and_H
from honeyprof.synthgen import SynthConfig, generate

work = Path(tempfile.mkdtemp(prefix="honeyprof-demo-"))
data = generate(SynthConfig(seed=1, unclassified=10, arp_rows=20, stray_rows=20))
flows_path, _, registry_path = data.write(work)
print(f"wrote {len(data.flows)} flows to {flows_path}")

# ARP rows and flows to addresses outside the registry are dropped and counted.
registry = HoneypotRegistry.load(registry_path)
report = IngestReport()
attacks = list(resolve_attacks(parse_flow_file(flows_path, report=report), registry, report))
print(report)

summaries = aggregate(attacks)
print(f"\n{len(summaries)} attackers, {len(attacks)} attacks\n")
print(stat_rows_csv(table_by_H(summaries, len(registry)), "H"))

# Cells cover attackers with at least one TCP/UDP service; ICMP-only
# attackers make up the remainder.
matrix = table_by_S_and_H(summaries, len(registry))
print(matrix_csv(matrix, "H"))
print(f"S=0 remainder: {s_zero_share(summaries):.2f}%  (cells + remainder = "
      f"{matrix.total() + s_zero_share(summaries):.2f}%)")
