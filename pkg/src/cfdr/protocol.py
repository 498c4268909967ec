"""User and Cloud state machines for upload, delete and read.

Every protocol arrow that is a ledger transaction goes through a
:class:`~cfdr.actors.Channel`; ciphertext transfer and URL fetches happen
off-chain, directly between the actor objects.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field

from .actors import Actor, Channel
from .arbitrator import (
    adjudicate_altered,
    adjudicate_missing,
    latest_accepted_digest,
    record_verdict,
)
from .crypto import H
from .encoding import Writer
from .ledger import DuplicateSigner, Transaction, make_double_signed
from .payloads import (
    ContractTrigger,
    DeleteAck,
    DeleteReq,
    DigestAck,
    ReadGrant,
    ReadMissing,
    ReadReq,
    Role,
    UploadAck,
    UploadDone,
    UploadInit,
    Verdict,
)

__all__ = [
    "BehaviorMode", "CloudBehavior", "Mutation", "StoredObject", "User", "Cloud", "Contract",
    "CloudRefused", "UploadOutcome", "DeleteOutcome", "ReadOutcome", "encrypt", "decrypt",
    "run_upload", "run_delete", "run_read", "make_double_signed", "DuplicateSigner",
]


def _keystream(key: bytes, nonce: bytes, n: int) -> bytes:
    return hashlib.shake_256(Writer().bytes_(key).bytes_(nonce).getvalue()).digest(n)


def encrypt(plaintext: bytes, key: bytes, nonce: bytes = b"") -> bytes:
    """XOR with a SHAKE-256 keystream; length-preserving, so b'' maps to b''."""
    if not key:
        raise ValueError("encryption key must be non-empty")
    stream = _keystream(key, nonce, len(plaintext))
    return bytes(a ^ b for a, b in zip(plaintext, stream))


decrypt = encrypt


@dataclass(frozen=True)
class StoredObject:
    file_id: str
    ciphertext: bytes

    @property
    def digest(self) -> bytes:
        return H(self.ciphertext)


class BehaviorMode(enum.Enum):
    Honest = "Honest"
    DropAfterUpload = "DropAfterUpload"
    AlterAfterUpload = "AlterAfterUpload"
    RetainAfterDelete = "RetainAfterDelete"
    RefuseUploadAck = "RefuseUploadAck"


@dataclass(frozen=True)
class Mutation:
    offset: int = 0
    xor: int = 0x01

    def apply(self, data: bytes) -> bytes:
        if not data:
            return bytes([self.xor])
        buf = bytearray(data)
        buf[self.offset % len(buf)] ^= self.xor
        return bytes(buf)


@dataclass(frozen=True)
class CloudBehavior:
    mode: BehaviorMode
    file_id: str | None = None
    mutation: Mutation = Mutation()

    def __post_init__(self) -> None:
        if self.mode is not BehaviorMode.Honest and self.file_id is None:
            raise ValueError(f"{self.mode.value} targets a file_id")
        if self.mutation.xor == 0:
            raise ValueError("a mutation must change the data (xor != 0)")


HONEST = CloudBehavior(BehaviorMode.Honest)


@dataclass
class User(Actor):
    encryption_key: bytes = b""
    reject_digests: bool = False

    @classmethod
    def create(cls, label: str, **kwargs) -> User:
        kwargs.setdefault("encryption_key", H(f"cfdr-file-key:{label}".encode()))
        return super().create(Role.USER, label, **kwargs)

    def seal_file(self, file_id: str, plaintext: bytes) -> bytes:
        return encrypt(plaintext, self.encryption_key, file_id.encode())

    def open_file(self, file_id: str, ciphertext: bytes) -> bytes:
        return decrypt(ciphertext, self.encryption_key, file_id.encode())


@dataclass
class Cloud(Actor):
    storage: dict[str, StoredObject] = field(default_factory=dict)
    behaviors: dict[str, CloudBehavior] = field(default_factory=dict)
    staging: dict[str, bytes] = field(default_factory=dict)

    @classmethod
    def create(cls, label: str = "cloud", **kwargs) -> Cloud:
        return super().create(Role.CLOUD, label, **kwargs)

    def behavior(self, file_id: str) -> CloudBehavior:
        return self.behaviors.get(file_id, HONEST)

    def set_behavior(self, behavior: CloudBehavior) -> None:
        if behavior.file_id in self.behaviors:
            raise ValueError(f"file {behavior.file_id!r} already has a behavior")
        self.behaviors[behavior.file_id] = behavior

    def url_for(self, file_id: str) -> str:
        return f"mem://{self.label}/{file_id}"

    def fetch(self, url: str) -> bytes | None:
        prefix = f"mem://{self.label}/"
        if not url.startswith(prefix):
            return None
        obj = self.storage.get(url[len(prefix):])
        return obj.ciphertext if obj else None


@dataclass
class Contract(Actor):
    @classmethod
    def create(cls, label: str = "contract", **kwargs) -> Contract:
        return super().create(Role.CONTRACT, label, **kwargs)


class CloudRefused(Exception):
    def __init__(self, outcome: UploadOutcome) -> None:
        super().__init__(f"cloud never acknowledged the upload of {outcome.file_id!r}")
        self.outcome = outcome


@dataclass
class UploadOutcome:
    file_id: str
    completed_step: int
    tx_ids: list[bytes]
    accepted: bool | None = None
    digest: bytes | None = None
    refused: bool = False


@dataclass
class DeleteOutcome:
    file_id: str
    tx_ids: list[bytes]
    retained: bool


@dataclass
class ReadOutcome:
    file_id: str
    tx_ids: list[bytes]
    found: bool
    match: bool | None = None
    verdict: Verdict | None = None
    url: str | None = None


def run_upload(user: User, cloud: Cloud, channel: Channel, file_id: str, plaintext: bytes) -> UploadOutcome:
    txs = [channel.post(user, cloud, UploadInit(file_id))]
    outcome = UploadOutcome(file_id, 1, txs)
    if cloud.behavior(file_id).mode is BehaviorMode.RefuseUploadAck:
        # The user gives up; the dangling UploadInit stays on-chain.
        outcome.refused = True
        raise CloudRefused(outcome)
    txs.append(channel.post(cloud, user, UploadAck(file_id)))

    ciphertext = user.seal_file(file_id, plaintext)
    cloud.staging[file_id] = ciphertext  # off-chain transfer
    received = cloud.staging[file_id]
    outcome.digest = H(received)
    txs.append(channel.post(cloud, user, UploadDone(file_id, outcome.digest)))

    accept = outcome.digest == H(ciphertext) and not user.reject_digests
    txs.append(channel.post(user, cloud, DigestAck(file_id, accept)))
    outcome.completed_step, outcome.accepted = 5, accept

    data = cloud.staging.pop(file_id)
    if accept:
        behavior = cloud.behavior(file_id)
        if behavior.mode is BehaviorMode.DropAfterUpload:
            cloud.storage.pop(file_id, None)
        else:
            if behavior.mode is BehaviorMode.AlterAfterUpload:
                data = behavior.mutation.apply(data)
            cloud.storage[file_id] = StoredObject(file_id, data)
    return outcome


def run_delete(user: User, cloud: Cloud, channel: Channel, file_id: str) -> DeleteOutcome:
    txs = [channel.post(user, cloud, DeleteReq(file_id))]
    retained = cloud.behavior(file_id).mode is BehaviorMode.RetainAfterDelete
    if not retained:
        cloud.storage.pop(file_id, None)
    txs.append(channel.post(cloud, user, DeleteAck(file_id)))
    return DeleteOutcome(file_id, txs, retained and file_id in cloud.storage)


def _trigger_contract(user: User, contract: Contract, channel: Channel, file_id: str,
                      read_req: bytes, grant: bytes | None, txs: list[bytes]) -> Verdict:
    channel.seal()
    txs.append(channel.post(user, contract, ContractTrigger(file_id, read_req)))
    channel.seal()
    if grant is None:
        verdict = adjudicate_missing(channel.ledger, file_id, read_req)
    else:
        verdict = adjudicate_altered(channel.ledger, file_id, grant)
    txs.append(record_verdict(channel, contract, verdict))
    return verdict


def run_read(user: User, cloud: Cloud, channel: Channel, file_id: str,
             contract: Contract | None = None) -> ReadOutcome:
    """Read a file back; on a missing or mismatching file, trigger ``contract`` if given."""
    req = channel.post(user, cloud, ReadReq(file_id))
    txs = [req]
    held = cloud.storage.get(file_id)
    if held is None:
        txs.append(channel.post(cloud, user, ReadMissing(file_id)))
        outcome = ReadOutcome(file_id, txs, found=False)
        if contract is not None:
            outcome.verdict = _trigger_contract(user, contract, channel, file_id, req, None, txs)
        return outcome

    url = cloud.url_for(file_id)
    grant = channel.post(cloud, user, ReadGrant(file_id, url, held.digest))
    txs.append(grant)
    fetched = cloud.fetch(url)  # off-chain access
    expected = latest_accepted_digest(channel.ledger, file_id)
    match = fetched is not None and expected is not None and H(fetched) == expected
    outcome = ReadOutcome(file_id, txs, found=True, match=match, url=url)
    if not match and contract is not None:
        outcome.verdict = _trigger_contract(user, contract, channel, file_id, req, grant, txs)
    return outcome
