"""Oracle measurement feed and percentile response-time SLA evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .actors import Actor, Channel
from .arbitrator import compensation_for
from .ledger import Ledger, LedgerError
from .payloads import Measurement, PayloadKind, Role, Verdict, Violation

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class UnknownOperationTx(LedgerError):
    pass


class WindowNotElapsed(LedgerError):
    pass


class SlaSchemaError(ValueError):
    pass


def to_fraction(value: Any, name: str) -> Fraction:
    """Exact rational from an int, a decimal/fraction string or a float literal."""
    if isinstance(value, bool):
        raise SlaSchemaError(f"{name}: expected a number, got a boolean")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, (float, str)):
        try:
            # str() of a float keeps the shortest literal, so 0.99 becomes 99/100.
            return Fraction(str(value))
        except (ValueError, ZeroDivisionError):
            pass
    raise SlaSchemaError(f"{name}: cannot read {value!r} as a rational number")


@dataclass(frozen=True)
class SlaSpec:
    metric: str
    threshold_t: Fraction
    required_fraction: Fraction
    window: int
    base_penalty: int
    penalty_rate: int

    FIELDS = ("metric", "threshold_t", "required_fraction", "window", "base_penalty", "penalty_rate")

    def __post_init__(self) -> None:
        if not 0 < self.required_fraction <= 1:
            raise SlaSchemaError("required_fraction must lie in (0, 1]")
        if self.threshold_t <= 0:
            raise SlaSchemaError("threshold_t must be positive")
        if self.window < 1:
            raise SlaSchemaError("window must be at least 1")
        if self.base_penalty < 0 or self.penalty_rate < 0:
            raise SlaSchemaError("penalties must be non-negative")

    @classmethod
    def from_mapping(cls, data: dict, where: str = "sla") -> SlaSpec:
        unknown = sorted(set(data) - set(cls.FIELDS))
        if unknown:
            raise SlaSchemaError(f"{where}: unknown field(s) {', '.join(unknown)}")
        missing = [f for f in cls.FIELDS if f not in data]
        if missing:
            raise SlaSchemaError(f"{where}: missing field(s) {', '.join(missing)}")
        if not isinstance(data["metric"], str) or not data["metric"]:
            raise SlaSchemaError(f"{where}.metric: expected a non-empty string")
        ints = {}
        for name in ("window", "base_penalty", "penalty_rate"):
            v = data[name]
            if isinstance(v, bool) or not isinstance(v, int):
                raise SlaSchemaError(f"{where}.{name}: expected an integer")
            ints[name] = v
        return cls(
            metric=data["metric"],
            threshold_t=to_fraction(data["threshold_t"], f"{where}.threshold_t"),
            required_fraction=to_fraction(data["required_fraction"], f"{where}.required_fraction"),
            **ints,
        )

    @classmethod
    def loads(cls, text: str) -> SlaSpec:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise SlaSchemaError(f"sla: {exc}") from None
        return cls.from_mapping(data)

    @classmethod
    def load(cls, path: str | Path) -> SlaSpec:
        return cls.loads(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        return (
            f'metric = "{self.metric}"\n'
            f'threshold_t = "{self.threshold_t}"\n'
            f'required_fraction = "{self.required_fraction}"\n'
            f"window = {self.window}\n"
            f"base_penalty = {self.base_penalty}\n"
            f"penalty_rate = {self.penalty_rate}\n"
        )


DEFAULT_SLA = SlaSpec(
    metric="response_time",
    threshold_t=Fraction(1),
    required_fraction=Fraction(99, 100),
    window=100,
    base_penalty=100,
    penalty_rate=10,
)


def post_measurement(channel: Channel, oracle: Actor, metric: str, op_tx_id: bytes,
                     value: Fraction | int | str, recipient: bytes | None = None) -> bytes:
    """Post a Measurement from the oracle about a sealed operation.

    The recipient defaults to the registered contract.
    """
    if channel.ledger.find(op_tx_id) is None:
        raise UnknownOperationTx(f"{op_tx_id.hex()[:12]} is not sealed on-chain")
    if recipient is None:
        contracts = channel.ledger.parties(Role.CONTRACT)
        recipient = contracts[0].pseudonym if contracts else oracle.pseudonym
    return channel.post(oracle, recipient, Measurement(metric, to_fraction(value, "value"), op_tx_id))


@dataclass(frozen=True)
class WindowResult:
    start: int
    end: int
    total: int
    below: int
    compliant: bool
    verdict: Verdict
    values: tuple[Fraction, ...] = ()

    @property
    def achieved_fraction(self) -> Fraction | None:
        return Fraction(self.below, self.total) if self.total else None

    def report(self) -> str:
        achieved = "n/a" if self.total == 0 else str(self.achieved_fraction)
        achieved_dec = "n/a" if self.total == 0 else f"{float(self.achieved_fraction):.6f}"
        return (
            f"window\t{self.start}..{self.end}\n"
            f"measurements\t{self.total}\n"
            f"below_threshold\t{self.below}\n"
            f"achieved_fraction\t{achieved}\t{achieved_dec}\n"
            f"compliant\t{'yes' if self.compliant else 'no'}\n"
            f"compensation\t{self.verdict.compensation}\n"
            f"{self.verdict.report_line()}\n"
        )


def window_measurements(ledger: Ledger, metric: str, start: int, end: int):
    """Sealed Measurement transactions for the metric posted in [start, end]."""
    return [tx for _, tx in ledger.query(payload_kind=PayloadKind.Measurement, time_range=(start, end))
            if tx.payload.metric == metric]


def evaluate_window(ledger: Ledger, sla: SlaSpec, start: int) -> WindowResult:
    """Evaluate the window covering logical times ``start .. start + window - 1``.

    A measurement counts as below the threshold only if strictly smaller.
    """
    end = start + sla.window - 1
    sealed_time = ledger.last_sealed_time
    if sealed_time is None or sealed_time < end:
        raise WindowNotElapsed(f"window ends at {end}, sealed time is {sealed_time}")
    txs = window_measurements(ledger, sla.metric, start, end)
    total = len(txs)
    slow = [tx for tx in txs if not tx.payload.value < sla.threshold_t]
    below = total - len(slow)
    compliant = total == 0 or Fraction(below, total) >= sla.required_fraction
    if compliant:
        verdict = Verdict(Violation.NoViolation, None, 0, (), metric=sla.metric)
    else:
        clouds = ledger.parties(Role.CLOUD)
        if len(clouds) != 1:
            raise LedgerError("percentile SLA needs exactly one registered Cloud")
        achieved = Fraction(below, total)
        verdict = Verdict(
            Violation.SlaPercentileBreach,
            clouds[0].pseudonym,
            compensation_for(Violation.SlaPercentileBreach, sla, achieved),
            tuple(tx.tx_id for tx in slow),
            metric=sla.metric,
        )
    return WindowResult(start, end, total, below, compliant, verdict,
                        tuple(tx.payload.value for tx in txs))

