import ipaddress
import random
from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from honeyprof.enrich import (
    INTERNET_PENETRATION_2023,
    ContinentIndex,
    EnrichmentError,
    IpSetIndex,
    annotate,
    load_benign_scanners,
    load_continent_index,
    load_penetration_table,
    load_tor_exits,
    share_of,
)
from honeyprof.metrics import aggregate

from .conftest import attack


def test_prefix_containment_and_default(tmp_path):
    p = tmp_path / "geo.csv"
    p.write_text("cidr,continent\n1.0.0.0/8,AS\n10.0.0.0/8,EU\n10.1.0.0/16,NA\n# note\n")
    idx = load_continent_index(p)
    assert idx.lookup("1.2.3.4") == "AS"
    assert idx.lookup("10.1.2.3") == "NA"
    assert idx.lookup("10.2.0.1") == "EU"
    assert idx.lookup("8.8.8.8") == "ZZ"
    assert len(idx) == 3
    assert ("10.1.0.0/16", "NA") in idx.ranges


def test_continent_errors(tmp_path):
    p = tmp_path / "geo.csv"
    p.write_text("10.0.0.0/8,EU\n10.0.0.0/8,AS\n")
    with pytest.raises(EnrichmentError):
        load_continent_index(p)
    p.write_text("10.0.0.0/33,EU\n")
    with pytest.raises(EnrichmentError, match=":1:"):
        load_continent_index(p)
    p.write_text("10.0.0.0/8,XX\n")
    with pytest.raises(EnrichmentError):
        load_continent_index(p)
    p.write_text("10.0.0.0/8,EU\n10.0.0.0/8,EU\n")
    assert len(load_continent_index(p)) == 1


@given(st.lists(st.tuples(st.integers(0, 2**32 - 1), st.integers(0, 24), st.sampled_from("AF AS EU NA OC SA".split())), max_size=15),
       st.lists(st.integers(0, 2**32 - 1), min_size=1, max_size=20))
def test_longest_prefix_matches_linear_scan(ranges, probes):
    nets = {}
    for addr, plen, code in ranges:
        net = ipaddress.IPv4Network((addr, plen), strict=False)
        nets.setdefault(net, code)
    idx = ContinentIndex(nets.items())
    for p in probes:
        ip = ipaddress.IPv4Address(p)
        hits = [(n.prefixlen, c) for n, c in nets.items() if ip in n]
        want = max(hits)[1] if hits else "ZZ"
        assert idx.lookup(str(ip)) == want


def _write(path, ips, comment=True):
    path.write_text(("# exit list\n" if comment else "") + "\n".join(ips) + "\n")


def test_tor_union_and_date_filter(tmp_path):
    shared = [f"192.0.2.{i}" for i in range(5)]
    _write(tmp_path / "2021-04-23.txt", shared + [f"198.51.100.{i}" for i in range(5)])
    _write(tmp_path / "2021-04-24.txt", shared + [f"203.0.113.{i}" for i in range(5)] + shared[:2])
    _write(tmp_path / "2021-07-01.txt", ["100.64.0.1"])
    _write(tmp_path / "README.txt", ["100.64.0.2"])
    idx = load_tor_exits(tmp_path, (date(2021, 4, 23), date(2021, 6, 1)))
    assert len(idx) == 15
    assert "100.64.0.1" not in idx and "100.64.0.2" not in idx
    assert len(load_tor_exits(tmp_path)) == 16
    empty = load_tor_exits(tmp_path, (date(2020, 1, 1), date(2020, 1, 2)))
    assert len(empty) == 0


def test_tor_bulk_format(tmp_path):
    (tmp_path / "2021-05-01-exits").write_text(
        "ExitNode 0011BD2485AD45D984EC4159C88FC066E5E3300E\n"
        "Published 2021-05-01 08:00:00\nLastStatus 2021-05-01 09:02:00\n"
        "ExitAddress 162.247.74.201 2021-05-01 09:08:36\n"
    )
    assert load_tor_exits(tmp_path / "2021-05-01-exits").ips == frozenset({"162.247.74.201"})


def test_benign_list(tmp_path):
    p = tmp_path / "benign.txt"
    _write(p, ["192.0.2.1", "192.0.2.1", "not-an-ip", "192.0.2.2"])
    idx = load_benign_scanners(p)
    assert len(idx) == 2 and idx.malformed == 1
    p.write_text("")
    assert len(load_benign_scanners(p)) == 0


def test_benign_list_size_bound(tmp_path):
    rng = random.Random(3)
    ips = [str(ipaddress.IPv4Address(rng.getrandbits(32))) for _ in range(8508)]
    p = tmp_path / "benign.txt"
    _write(p, ips)
    assert len(load_benign_scanners(p)) <= 8508


def _summaries():
    return aggregate([
        attack(1, src="1.2.3.4"),
        attack(2, src="1.2.3.4", t=1),
        attack(1, src="8.8.8.8"),
        attack(3, src="9.9.9.9"),
    ])


def test_annotate_flags_and_continent():
    geo = ContinentIndex([("1.0.0.0/8", "AS"), ("8.0.0.0/8", "NA")])
    tor = IpSetIndex(frozenset({"1.2.3.4"}), "tor-exits")
    benign = IpSetIndex(frozenset({"1.2.3.4", "8.8.8.8"}), "benign-scanners")
    out = {s.ip: s for s in annotate(_summaries().values(), geo, tor, benign)}
    assert out["1.2.3.4"].is_tor and out["1.2.3.4"].is_benign_scanner
    assert out["1.2.3.4"].continent == "AS"
    assert out["8.8.8.8"].is_benign_scanner and not out["8.8.8.8"].is_tor
    assert out["9.9.9.9"].continent == "ZZ"
    again = {s.ip: s for s in annotate(out.values(), geo, tor, benign)}
    assert again == out
    assert sorted((s.ip, s.attack_count) for s in out.values()) == sorted(
        (s.ip, s.attack_count) for s in _summaries().values()
    )
    assert out["1.2.3.4"].H == 2


def test_tor_plant_rate_is_exact():
    rng = random.Random(11)
    ips = [f"198.18.{i // 256}.{i % 256}" for i in range(4000)]
    planted = set(rng.sample(ips, 400))
    summaries = aggregate(attack(1, src=ip) for ip in ips)
    out = list(annotate(summaries.values(), None, IpSetIndex(frozenset(planted), "tor-exits")))
    assert share_of(out, "is_tor") == len(planted) / len(ips)


def test_penetration_table(tmp_path):
    p = tmp_path / "pen.csv"
    p.write_text("continent,share\nAS,58\nEU,13.9\n")
    assert load_penetration_table(p) == {"AS": 58.0, "EU": 13.9}
    assert sum(INTERNET_PENETRATION_2023.values()) == pytest.approx(100.1)
    p.write_text("AS,-1\n")
    with pytest.raises(EnrichmentError):
        load_penetration_table(p)
