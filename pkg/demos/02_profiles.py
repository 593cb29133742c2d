"""Attacker profiles and the origin normalisation.

Every synthetic attacker carries its intended profile, so the 2x2 profile
matrix can be checked against ground truth.  The second half annotates
attackers with continents from a CIDR file and compares shares with the
Internet-population table.
"""
from __future__ import annotations

import tempfile
from pathlib import Path

from honeyprof.enrich import INTERNET_PENETRATION_2023, annotate, load_continent_index
from honeyprof.ingest import resolve_attacks
from honeyprof.metrics import aggregate, continent_shares, penetration_ratio
from honeyprof.profiler import Profile, classify, profile_matrix
from honeyprof.synthgen import SynthConfig, generate

counts = {
    Profile.CASUAL_FOCUSED: 300,
    Profile.CASUAL_EXPLORER: 40,
    Profile.DRIVEN_FOCUSED: 30,
    Profile.DRIVEN_EXPLORER: 60,
}
data = generate(SynthConfig(seed=2, counts=counts, unclassified=15))
summaries = aggregate(resolve_attacks(data.flows, data.registry))
hits = sum(classify(s).value == data.labels[ip][0] for ip, s in summaries.items())
print(f"profile recovered for {hits}/{len(summaries)} attackers")

pm = profile_matrix(summaries)
print("\nattackers %       Casual   Driven")
for name, row in zip(("Focused ", "Explorer"), pm.grid("attacker_pct")):
    print(f"  {name}        {row[0]:6.2f}   {row[1]:6.2f}")
print(f"  unclassified    {pm[Profile.UNCLASSIFIED].attacker_pct:6.2f}")

# A toy continent file: split the synthetic source block in two halves.
geo = Path(tempfile.mkdtemp()) / "geo.csv"
geo.write_text("cidr,continent\n198.18.0.0/16,AS\n198.19.0.0/17,EU\n198.19.128.0/17,NA\n")
annotated = list(annotate(summaries.values(), load_continent_index(geo)))
shares = continent_shares({s.ip: s for s in annotated})
ratios = penetration_ratio(shares, INTERNET_PENETRATION_2023)
print("\ncontinent  share%  expected%  ratio")
for c in ("AS", "EU", "NA"):
    print(f"  {c}       {shares[c]:6.2f}   {INTERNET_PENETRATION_2023[c]:6.1f}   {ratios[c]:.2f}x")
