from __future__ import annotations

from fractions import Fraction

from cfdr.payloads import ReadReq
from cfdr.sla_oracle import SlaSpec, post_measurement

from conftest import make_world


def sla_spec(window: int, base_penalty: int = 50, penalty_rate: int = 7, threshold=Fraction(1)) -> SlaSpec:
    return SlaSpec("response_time", Fraction(threshold), Fraction(99, 100), window, base_penalty, penalty_rate)


def measured_world(values, metric: str = "response_time"):
    """A ledger with one sealed ReadReq per value, then one Measurement per value.

    Returns (world, window start); the measurements occupy exactly
    ``start .. start + len(values) - 1``.
    """
    w = make_world(max_block_size=256)
    ops = [w.channel.post(w.user, w.cloud, ReadReq(f"op{i}")) for i in range(len(values))]
    w.channel.seal()
    start = w.channel.now() + 1
    for op, v in zip(ops, values):
        post_measurement(w.channel, w.oracle, metric, op, v)
    w.channel.seal()
    return w, start
