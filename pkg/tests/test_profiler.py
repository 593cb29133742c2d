import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honeyprof.ingest import resolve_attacks
from honeyprof.metrics import aggregate, table_by_H
from honeyprof.profiler import PROFILES, Profile, classify, classify_hs, profile_matrix
from honeyprof.synthgen import SynthConfig, generate

from .conftest import attack


@pytest.mark.parametrize(
    "h,s,expected",
    [
        (1, 1, Profile.CASUAL_FOCUSED),
        (1, 3, Profile.CASUAL_EXPLORER),
        (5, 1, Profile.DRIVEN_FOCUSED),
        (8, 6, Profile.DRIVEN_EXPLORER),
        (3, 0, Profile.UNCLASSIFIED),
    ],
)
def test_quadrants(h, s, expected):
    assert classify_hs(h, s) is expected


def test_classify_examples():
    one = aggregate([attack(1, dport=23)])["198.18.0.1"]
    assert classify(one) is Profile.CASUAL_FOCUSED
    many = aggregate([attack(1, dport=23), attack(2, dport=22, t=1), attack(3, dport=80, t=2)])
    assert classify(many["198.18.0.1"]) is Profile.DRIVEN_EXPLORER


@settings(max_examples=50)
@given(st.integers(1, 4), st.integers(1, 200))
def test_volume_does_not_change_profile(n_hp, repeat):
    base = [attack(h, t=h) for h in range(1, n_hp + 1)]
    more = [attack(h, t=h + 10 * i, row=i) for h in range(1, n_hp + 1) for i in range(repeat)]
    assert classify(aggregate(base)["198.18.0.1"]) is classify(aggregate(more)["198.18.0.1"])


def test_synthetic_labels_recovered(default_reg):
    data = generate(SynthConfig(seed=3, counts={p: 40 for p in PROFILES}, unclassified=15, arp_rows=5, stray_rows=5))
    summaries = aggregate(resolve_attacks(data.flows, default_reg))
    assert set(summaries) == set(data.labels)
    assert all(classify(s).value == data.labels[ip][0] for ip, s in summaries.items())


def test_matrix_agrees_with_h_table(default_reg):
    data = generate(SynthConfig(seed=8, unclassified=7))
    summaries = aggregate(resolve_attacks(data.flows, default_reg))
    pm = profile_matrix(summaries)
    rows = table_by_H(summaries, 8)
    by_h = {r.key: r for r in rows}
    casual = pm[Profile.CASUAL_FOCUSED].attacker_count + pm[Profile.CASUAL_EXPLORER].attacker_count
    driven = pm[Profile.DRIVEN_FOCUSED].attacker_count + pm[Profile.DRIVEN_EXPLORER].attacker_count
    unc_h1 = sum(1 for s in summaries.values() if s.S == 0 and s.H == 1)
    assert casual + unc_h1 == by_h[1].attacker_count
    assert driven + pm[Profile.UNCLASSIFIED].attacker_count - unc_h1 == sum(
        r.attacker_count for r in rows if r.key > 1
    )
    for field in ("attacker_pct", "attack_pct"):
        total = sum(sum(row) for row in pm.grid(field)) + getattr(pm[Profile.UNCLASSIFIED], field)
        assert total == pytest.approx(100, abs=0.05)


def test_emitters():
    pm = profile_matrix(aggregate([attack(1)]))
    assert pm.to_csv().splitlines()[1] == "CasualFocused,1,1,100.00,100.00,0.00,0.00"
    assert '"attackers_pct": [\n' in pm.to_json()
    empty = profile_matrix({})
    assert empty.total_attackers == 0 and empty[Profile.CASUAL_FOCUSED].attacker_pct == 0
