from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from honeyprof.flowcore import Attack, FlowRecord, HoneypotRegistry
from honeyprof.synthgen import default_registry, make_registry

T0 = datetime(2021, 4, 23, tzinfo=timezone.utc)


def flow(src="198.18.0.1", dst="203.0.113.1", proto="tcp", dport=23, t=0.0, row=0):
    ports = proto in ("tcp", "udp")
    return FlowRecord(
        start_time=T0 + timedelta(seconds=t),
        duration=0.0,
        protocol=proto,
        src_ip=src,
        dst_ip=dst,
        src_port=40000 if ports else None,
        dst_port=dport if ports else None,
        order=(0, row),
    )


def attack(hp, src="198.18.0.1", proto="tcp", dport=23, t=0.0, row=0, registry=None):
    registry = registry or make_registry(8)
    return Attack(flow(src, registry.ip_of(hp), proto, dport, t, row), hp)


@pytest.fixture
def reg8() -> HoneypotRegistry:
    return make_registry(8)


@pytest.fixture
def default_reg() -> HoneypotRegistry:
    return default_registry()


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip('.'))):
            terminalreporter.write_line(line)
