"""Typed transaction payloads, party roles and the verdict record.

Every payload kind belongs to exactly one sender role; the ledger enforces
this on submission and :func:`cfdr.ledger.check_roles` re-checks it on any
chain.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar

from .encoding import MalformedInput, Reader, Writer
from .crypto import HASH_LEN


class Role(enum.IntEnum):
    USER = 1
    CLOUD = 2
    ORACLE = 3
    CONTRACT = 4

    @classmethod
    def parse(cls, text: str) -> Role:
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown role {text!r}") from None

    @property
    def title(self) -> str:
        return self.name.capitalize()


class PayloadKind(enum.IntEnum):
    UploadInit = 1
    UploadAck = 2
    UploadDone = 3
    DigestAck = 4
    DeleteReq = 5
    DeleteAck = 6
    ReadReq = 7
    ReadGrant = 8
    ReadMissing = 9
    ContractTrigger = 10
    VerdictRecord = 11
    Measurement = 12

    @classmethod
    def parse(cls, text: str) -> PayloadKind:
        try:
            return cls[text]
        except KeyError:
            raise ValueError(f"unknown payload kind {text!r}") from None


class Violation(enum.IntEnum):
    NoViolation = 0
    DataLoss = 1
    DataAlteration = 2
    UnauthorizedRetention = 3
    UserAtFault = 4
    SlaPercentileBreach = 5


@dataclass(frozen=True)
class Verdict:
    violation: Violation
    responsible: bytes | None
    compensation: int
    evidence: tuple[bytes, ...]
    file_id: str | None = None
    metric: str | None = None

    def __post_init__(self) -> None:
        if (self.file_id is None) == (self.metric is None):
            raise ValueError("a verdict concerns exactly one of file_id or metric")
        if self.compensation < 0:
            raise ValueError("compensation must be non-negative")
        if self.violation is Violation.NoViolation and (
            self.responsible is not None or self.compensation != 0
        ):
            raise ValueError("NoViolation carries no responsible party and no compensation")

    @property
    def subject(self) -> str:
        return f"file:{self.file_id}" if self.file_id is not None else f"metric:{self.metric}"

    def encode(self, w: Writer) -> None:
        w.u8(self.violation)
        w.bool_(self.responsible is not None)
        if self.responsible is not None:
            w.bytes_(self.responsible)
        w.u64(self.compensation)
        w.count(len(self.evidence))
        for tx_id in self.evidence:
            w.bytes_(tx_id)
        if self.file_id is not None:
            w.u8(0).str_(self.file_id)
        else:
            w.u8(1).str_(self.metric)

    @classmethod
    def decode(cls, r: Reader) -> Verdict:
        start = r.pos
        try:
            violation = Violation(r.u8())
        except ValueError:
            raise MalformedInput("unknown violation code", start) from None
        responsible = r.bytes_(HASH_LEN) if r.bool_() else None
        compensation = r.u64()
        evidence = tuple(r.bytes_(HASH_LEN) for _ in range(r.count()))
        tag_at = r.pos
        tag = r.u8()
        if tag == 0:
            file_id, metric = r.str_(), None
        elif tag == 1:
            file_id, metric = None, r.str_()
        else:
            raise MalformedInput("bad verdict subject tag", tag_at)
        try:
            return cls(violation, responsible, compensation, evidence, file_id, metric)
        except ValueError as exc:
            raise MalformedInput(str(exc), start) from None

    def report_line(self) -> str:
        responsible = self.responsible.hex() if self.responsible is not None else "none"
        evidence = ",".join(t.hex() for t in self.evidence) or "-"
        return (
            f"violation={self.violation.name}\tresponsible={responsible}\t"
            f"compensation={self.compensation}\tsubject={self.subject}\tevidence={evidence}"
        )


class Payload:
    kind: ClassVar[PayloadKind]
    role: ClassVar[Role]
    file_id: str | None

    def encode_fields(self, w: Writer) -> None:
        w.str_(self.file_id)

    @classmethod
    def decode_fields(cls, r: Reader) -> Payload:
        return cls(r.str_())

    def encode(self, w: Writer) -> None:
        w.u8(self.kind)
        self.encode_fields(w)

    @staticmethod
    def decode(r: Reader) -> Payload:
        start = r.pos
        code = r.u8()
        try:
            cls = PAYLOAD_TYPES[PayloadKind(code)]
        except ValueError:
            raise MalformedInput(f"unknown payload kind {code}", start) from None
        return cls.decode_fields(r)


@dataclass(frozen=True)
class UploadInit(Payload):
    kind: ClassVar = PayloadKind.UploadInit
    role: ClassVar = Role.USER
    file_id: str


@dataclass(frozen=True)
class UploadAck(Payload):
    kind: ClassVar = PayloadKind.UploadAck
    role: ClassVar = Role.CLOUD
    file_id: str


@dataclass(frozen=True)
class UploadDone(Payload):
    kind: ClassVar = PayloadKind.UploadDone
    role: ClassVar = Role.CLOUD
    file_id: str
    digest: bytes

    def encode_fields(self, w: Writer) -> None:
        w.str_(self.file_id).bytes_(self.digest)

    @classmethod
    def decode_fields(cls, r: Reader) -> UploadDone:
        return cls(r.str_(), r.bytes_(HASH_LEN))


@dataclass(frozen=True)
class DigestAck(Payload):
    kind: ClassVar = PayloadKind.DigestAck
    role: ClassVar = Role.USER
    file_id: str
    accept: bool

    def encode_fields(self, w: Writer) -> None:
        w.str_(self.file_id).bool_(self.accept)

    @classmethod
    def decode_fields(cls, r: Reader) -> DigestAck:
        return cls(r.str_(), r.bool_())


@dataclass(frozen=True)
class DeleteReq(Payload):
    kind: ClassVar = PayloadKind.DeleteReq
    role: ClassVar = Role.USER
    file_id: str


@dataclass(frozen=True)
class DeleteAck(Payload):
    kind: ClassVar = PayloadKind.DeleteAck
    role: ClassVar = Role.CLOUD
    file_id: str


@dataclass(frozen=True)
class ReadReq(Payload):
    kind: ClassVar = PayloadKind.ReadReq
    role: ClassVar = Role.USER
    file_id: str


@dataclass(frozen=True)
class ReadGrant(Payload):
    kind: ClassVar = PayloadKind.ReadGrant
    role: ClassVar = Role.CLOUD
    file_id: str
    url: str
    digest: bytes

    def encode_fields(self, w: Writer) -> None:
        w.str_(self.file_id).str_(self.url).bytes_(self.digest)

    @classmethod
    def decode_fields(cls, r: Reader) -> ReadGrant:
        return cls(r.str_(), r.str_(), r.bytes_(HASH_LEN))


@dataclass(frozen=True)
class ReadMissing(Payload):
    kind: ClassVar = PayloadKind.ReadMissing
    role: ClassVar = Role.CLOUD
    file_id: str


@dataclass(frozen=True)
class ContractTrigger(Payload):
    kind: ClassVar = PayloadKind.ContractTrigger
    role: ClassVar = Role.USER
    file_id: str
    read_req_tx_id: bytes

    def encode_fields(self, w: Writer) -> None:
        w.str_(self.file_id).bytes_(self.read_req_tx_id)

    @classmethod
    def decode_fields(cls, r: Reader) -> ContractTrigger:
        return cls(r.str_(), r.bytes_(HASH_LEN))


@dataclass(frozen=True)
class VerdictRecord(Payload):
    kind: ClassVar = PayloadKind.VerdictRecord
    role: ClassVar = Role.CONTRACT
    verdict: Verdict

    @property
    def file_id(self) -> str | None:
        return self.verdict.file_id

    def encode_fields(self, w: Writer) -> None:
        self.verdict.encode(w)

    @classmethod
    def decode_fields(cls, r: Reader) -> VerdictRecord:
        return cls(Verdict.decode(r))


@dataclass(frozen=True)
class Measurement(Payload):
    kind: ClassVar = PayloadKind.Measurement
    role: ClassVar = Role.ORACLE
    metric: str
    value: Fraction
    op_tx_id: bytes

    file_id: ClassVar[None] = None

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError("measurement values are non-negative")

    def encode_fields(self, w: Writer) -> None:
        w.str_(self.metric).fraction(self.value).bytes_(self.op_tx_id)

    @classmethod
    def decode_fields(cls, r: Reader) -> Measurement:
        return cls(r.str_(), r.fraction(), r.bytes_(HASH_LEN))


PAYLOAD_TYPES: dict[PayloadKind, type[Payload]] = {
    cls.kind: cls
    for cls in (
        UploadInit, UploadAck, UploadDone, DigestAck, DeleteReq, DeleteAck,
        ReadReq, ReadGrant, ReadMissing, ContractTrigger, VerdictRecord, Measurement,
    )
}
