import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honeyprof.earlywarn import (
    EarlyWarningError,
    SightingTable,
    evaluate,
    reports_csv,
    sweep_sensor_sets,
)
from honeyprof.ingest import resolve_attacks
from honeyprof.profiler import PROFILES, Profile
from honeyprof.synthgen import SynthConfig, generate, make_registry

from .conftest import attack


def table(attacks, n=8):
    return SightingTable.from_attacks(attacks, make_registry(n))


def ascending_population(seed=0, **kw):
    cfg = SynthConfig(
        seed=seed,
        counts={p: 25 for p in PROFILES},
        sweep_fractions={"ascending": 1.0},
        **kw,
    )
    data = generate(cfg)
    return data, list(resolve_attacks(data.flows, cfg.registry))


def test_lead_time_definition():
    r = evaluate(table([attack(1, t=10), attack(2, t=50, row=1)]), [1], 2)
    assert r.covered_all == 1 and r.coverage_all == 1.0
    assert r.lead_min_s == r.lead_median_s == r.lead_max_s == 40


def test_production_only_and_simultaneous_not_covered():
    r = evaluate(table([attack(2, t=5)]), [1], 2)
    assert r.attackers_on_production == 1 and r.covered_all == 0 and r.coverage_all == 0
    r = evaluate(table([attack(1, t=5), attack(2, t=5, row=1)]), [1], 2)
    assert r.covered_all == 0


def test_undefined_coverage():
    r = evaluate(table([attack(1, t=5)]), [1], 2)
    assert r.coverage_all is None and r.coverage_driven is None and r.lead_median_s is None
    assert "undefined" in reports_csv([r]).splitlines()[1]


def test_argument_errors():
    t = table([attack(1)])
    with pytest.raises(EarlyWarningError):
        evaluate(t, [], 2)
    with pytest.raises(EarlyWarningError):
        evaluate(t, [2], 2)
    with pytest.raises(EarlyWarningError):
        evaluate(t, [1], 99)
    with pytest.raises(EarlyWarningError):
        sweep_sensor_sets(t, 2, 8)
    big = table([attack(1, registry=make_registry(17))], n=17)
    with pytest.raises(EarlyWarningError):
        sweep_sensor_sets(big, 1, 2)


def test_subset_count():
    # production is never a sensor: 7 candidates give 7 + 21 subsets
    data, attacks = ascending_population()
    t = SightingTable.from_attacks(attacks, data.registry)
    assert len(sweep_sensor_sets(t, 3, 2).reports) == 28
    # eight candidate sensors next to the production host give 8 + 28
    t9 = table([attack(h, t=h, registry=make_registry(9)) for h in range(1, 10)], n=9)
    assert len(sweep_sensor_sets(t9, 9, 2).reports) == 36


def test_ascending_sweepers(default_reg):
    data, attacks = ascending_population(seed=4)
    t = SightingTable.from_attacks(attacks, default_reg)
    asc = default_reg.ids_by_ip()
    r = evaluate(t, asc[:2], asc[-1])
    assert r.driven_on_production > 0 and r.coverage_driven == 1.0
    sweep = sweep_sensor_sets(t, asc[-1], 2)
    assert sweep.minimal_k == 1 and sweep.best_sensors == (asc[0],)
    # casual attackers of production never touch a sensor
    casual = [a for a in attacks if data.labels[a.src_ip][0] == Profile.CASUAL_FOCUSED.value]
    tc = SightingTable.from_attacks(casual, default_reg)
    rc = evaluate(tc, [h for h in default_reg.ids if h != asc[-1]], asc[-1])
    assert rc.attackers_on_production > 0 and rc.covered_all == 0


def test_unreachable_target():
    t = table([attack(2, t=5), attack(1, t=9, row=1), attack(3, t=10, row=2)], n=3)
    sweep = sweep_sensor_sets(t, 2, 2, target=0.9)
    assert sweep.minimal_k is None and sweep.best_sensors is None


def _random_table(seed, n=6, attackers=30):
    rng = random.Random(seed)
    attacks = []
    for a in range(attackers):
        src = f"198.18.2.{a}"
        for j in range(rng.randint(1, 8)):
            attacks.append(attack(rng.randint(1, n), src=src, dport=rng.choice([22, 23]), t=rng.randint(0, 50), row=j))
    return attacks


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_monotone_in_sensors(seed):
    t = table(_random_table(seed), n=6)
    others = [2, 3, 4, 5, 6]
    cov = {s: evaluate(t, s, 1) for k in (1, 2, 3) for s in itertools.combinations(others, k)}
    for s, r in cov.items():
        for extra in others:
            if extra not in s and len(s) < 3:
                bigger = cov[tuple(sorted(s + (extra,)))]
                assert bigger.covered_all >= r.covered_all
                assert bigger.covered_driven >= r.covered_driven


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_reorder_invariance(seed):
    attacks = _random_table(seed)
    shuffled = attacks[:]
    random.Random(seed).shuffle(shuffled)
    a = sweep_sensor_sets(table(attacks, 6), 1, 2)
    b = sweep_sensor_sets(table(shuffled, 6), 1, 2)
    assert reports_csv(a.reports) == reports_csv(b.reports)


def test_brute_force_replay():
    attacks = _random_table(7)
    first = {}
    for a in attacks:
        key = (a.src_ip, a.honeypot_id)
        first[key] = min(first.get(key, np.inf), a.flow.start_time.timestamp())
    r = evaluate(table(attacks, 6), [2, 3], 1)
    covered = 0
    for ip in {a.src_ip for a in attacks}:
        p = first.get((ip, 1), np.inf)
        s = min(first.get((ip, 2), np.inf), first.get((ip, 3), np.inf))
        covered += np.isfinite(p) and s < p
    assert r.covered_all == covered


def test_csv_header():
    t = table([attack(1, t=0), attack(2, t=1, row=1)], n=2)
    text = reports_csv(sweep_sensor_sets(t, 2, 1).reports)
    assert text.splitlines() == [
        "sensors,production,coverage_all,coverage_driven,lead_min_s,lead_median_s,lead_max_s",
        "1,2,1.000000,1.000000,1.000000,1.000000,1.000000",
    ]
