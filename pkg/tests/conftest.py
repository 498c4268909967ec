from __future__ import annotations

from dataclasses import dataclass

import pytest

from cfdr.actors import Actor, Channel
from cfdr.ledger import Ledger
from cfdr.payloads import Role
from cfdr.protocol import Cloud, Contract, User


@dataclass
class World:
    channel: Channel
    user: User
    cloud: Cloud
    contract: Contract
    oracle: Actor

    @property
    def ledger(self) -> Ledger:
        return self.channel.ledger


def make_world(double_signed=frozenset(), max_block_size: int = 16) -> World:
    channel = Channel(Ledger(double_signed_kinds=frozenset(double_signed)), max_block_size=max_block_size)
    w = World(channel, User.create("alice"), Cloud.create("cloud"), Contract.create("contract"),
              Actor.create(Role.ORACLE, "oracle"))
    channel.register(w.user, w.cloud, w.contract, w.oracle)
    channel.seal()
    return w


@pytest.fixture
def world() -> World:
    return make_world()


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(number: int, name: str, ok: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {name}" + (f" ({detail})" if detail else "")
        _CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
