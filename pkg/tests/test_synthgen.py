import pytest

from honeyprof.ingest import IngestReport, parse_flow_file, resolve_attacks
from honeyprof.metrics import aggregate
from honeyprof.profiler import PROFILES, Profile
from honeyprof.seqmine import build_sequences, count_patterns
from honeyprof.flowcore import HoneypotRegistry
from honeyprof.synthgen import SynthConfig, generate, random_config, read_labels


def test_deterministic():
    a = generate(SynthConfig(seed=11, arp_rows=3, stray_rows=3))
    b = generate(SynthConfig(seed=11, arp_rows=3, stray_rows=3))
    assert a.flows_csv() == b.flows_csv() and a.labels_csv() == b.labels_csv()
    assert generate(SynthConfig(seed=12)).flows_csv() != a.flows_csv()


def test_flows_time_sorted():
    flows = generate(SynthConfig(seed=2)).flows
    assert [f.sort_key for f in flows] == sorted(f.sort_key for f in flows)


def test_casual_focused_only(default_reg):
    data = generate(SynthConfig(counts={Profile.CASUAL_FOCUSED: 10}))
    summaries = aggregate(resolve_attacks(data.flows, default_reg))
    assert len(summaries) == 10
    assert all(s.H == 1 and s.S == 1 for s in summaries.values())


def test_ascending_explorers_follow_ip_order(default_reg):
    cfg = SynthConfig(counts={Profile.DRIVEN_EXPLORER: 5}, sweep_fractions={"ascending": 1.0})
    data = generate(cfg)
    seqs = build_sequences(resolve_attacks(data.flows, default_reg))
    assert len(seqs) == 5
    assert all(s.seq == (7, 2, 6, 4, 5, 8, 1, 3) for s in seqs.values())
    counts = count_patterns(seqs.values(), 8, patterns=[(7, 2, 6, 4, 5, 8, 1, 3)])
    assert counts[0].exact_count == 5


def test_file_round_trip(tmp_path, default_reg):
    data = generate(SynthConfig(seed=5, unclassified=4, arp_rows=6, stray_rows=9))
    flows_path, labels_path, reg_path = data.write(tmp_path)
    reg = HoneypotRegistry.load(reg_path)
    assert reg == default_reg
    report = IngestReport()
    attacks = list(resolve_attacks(parse_flow_file(flows_path, report=report), reg, report))
    assert report.consistent() and report.rows_malformed == 0
    assert (report.rows_dropped_arp, report.rows_dropped_unknown_dst) == (6, 9)
    assert aggregate(attacks) == aggregate(resolve_attacks(data.flows, default_reg))
    assert read_labels(labels_path) == data.labels


def test_random_configs_valid():
    for seed in range(20):
        cfg = random_config(seed, max_attackers=200)
        cfg.validate()
        data = generate(cfg)
        assert len(data.labels) == sum(cfg.counts.values()) + cfg.unclassified


def test_rejects_bad_config():
    with pytest.raises(ValueError):
        generate(SynthConfig(registry=None))
    with pytest.raises(ValueError):
        generate(SynthConfig(sweep_fractions={"ascending": 0.5}))
    with pytest.raises(ValueError):
        generate(SynthConfig(counts={Profile.CASUAL_EXPLORER: 1}, port_pool=(22,)))
    with pytest.raises(ValueError):
        generate(SynthConfig(attack_range={p: (0, 3) for p in PROFILES}))
