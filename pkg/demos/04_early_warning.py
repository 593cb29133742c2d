"""Honeypots as early-warning sensors.

One honeypot plays the production server.  For every sensor subset the
sweep reports how many production attackers were seen on a sensor first,
and how much earlier.  When driven attackers all sweep in ascending IP
order, the lowest-IP honeypot alone warns about every one of them.
"""
from __future__ import annotations

from honeyprof.earlywarn import SightingTable, evaluate, reports_csv, sweep_sensor_sets
from honeyprof.ingest import resolve_attacks
from honeyprof.profiler import PROFILES
from honeyprof.synthgen import SynthConfig, generate


def sightings(cfg: SynthConfig) -> SightingTable:
    return SightingTable.from_attacks(resolve_attacks(generate(cfg).flows, cfg.registry), cfg.registry)


ascending = SynthConfig(seed=4, counts={p: 80 for p in PROFILES}, sweep_fractions={"ascending": 1.0})
order = ascending.registry.ids_by_ip()
production = order[-1]
r = evaluate(sightings(ascending), [order[0]], production)
print(f"ascending sweepers, sensor {order[0]} -> production {production}: "
      f"coverage_driven {r.coverage_driven}, median lead {r.lead_median_s / 3600:.1f} h")

# Descending sweepers start at the production host and random-order ones
# often reach it early, so full coverage is no longer attainable.
mixed = SynthConfig(seed=4, counts={p: 80 for p in PROFILES},
                    sweep_fractions={"ascending": 0.6, "descending": 0.1, "random": 0.3})
table = sightings(mixed)
sweep = sweep_sensor_sets(table, production, k_max=3, target=0.8)
print(f"\nmixed sweepers: minimal k for 80% driven coverage = {sweep.minimal_k}, "
      f"sensors {sweep.best_sensors}")
print(reports_csv(sweep.reports[:7]))

# Casual attackers hit a single honeypot, so sensors never see them first.
r_all = evaluate(table, [h for h in mixed.registry.ids if h != production], production)
print(f"all other honeypots as sensors: coverage_all {r_all.coverage_all:.3f}, "
      f"coverage_driven {r_all.coverage_driven:.3f}")
