"""Append-only, hash-chained, pseudonymous transaction log.

Sealed blocks keep each transaction as its canonical byte encoding; the
decoded view is derived on demand.  This lets :meth:`Ledger.tamper` corrupt
a single byte without recomputing anything, and lets a corrupted ledger file
still load so that :meth:`Ledger.verify_chain` can say where it breaks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .crypto import HASH_LEN, HASH_NAME, ZERO_HASH, H, KeyPair, pseudonym_of, verify_signature
from .encoding import MalformedInput, Reader, Writer
from .payloads import Payload, PayloadKind, Role

MAGIC = b"CFDR"
FORMAT_VERSION = 1
PUBLIC_KEY_LEN = 32


class LedgerError(Exception):
    pass


class InvalidSignature(LedgerError):
    pass


class TimeRegression(LedgerError):
    pass


class RoleViolation(LedgerError):
    pass


class NothingToSeal(LedgerError):
    pass


class IndexOutOfRange(LedgerError, IndexError):
    pass


class PseudonymCollision(LedgerError):
    """Two distinct keys hashed to the same pseudonym; never expected."""


class DuplicateSigner(LedgerError):
    pass


class Reason(str, enum.Enum):
    BadBlockHash = "BadBlockHash"
    BadLink = "BadLink"
    BadTxHash = "BadTxHash"
    BadSignature = "BadSignature"


@dataclass(frozen=True)
class VerifyResult:
    block_index: int | None = None
    reason: Reason | None = None
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.reason is None

    def __str__(self) -> str:
        if self.ok:
            return "OK"
        return f"INCONSISTENT block={self.block_index} reason={self.reason.value} {self.detail}".rstrip()


@dataclass(frozen=True)
class Party:
    role: Role
    label: str
    public_key: bytes

    @property
    def pseudonym(self) -> bytes:
        return pseudonym_of(self.public_key)


@dataclass(frozen=True)
class Transaction:
    tx_id: bytes
    logical_time: int
    sender: bytes
    recipient: bytes
    payload: Payload
    nonce: int
    signatures: tuple[tuple[bytes, bytes], ...] = ()

    @staticmethod
    def body_bytes(logical_time: int, sender: bytes, recipient: bytes, payload: Payload, nonce: int) -> bytes:
        w = Writer().u64(logical_time).bytes_(sender).bytes_(recipient)
        payload.encode(w)
        return w.u64(nonce).getvalue()

    @classmethod
    def draft(cls, logical_time: int, sender: bytes, recipient: bytes, payload: Payload, nonce: int) -> Transaction:
        body = cls.body_bytes(logical_time, sender, recipient, payload, nonce)
        return cls(H(body), logical_time, sender, recipient, payload, nonce)

    def body(self) -> bytes:
        return self.body_bytes(self.logical_time, self.sender, self.recipient, self.payload, self.nonce)

    def signed_by(self, *signers: KeyPair) -> Transaction:
        names = [k.pseudonym for k in signers]
        if len(set(names)) != len(names):
            raise DuplicateSigner("a party may sign a transaction only once")
        sigs = tuple((k.pseudonym, k.sign(self.tx_id)) for k in signers)
        return Transaction(self.tx_id, self.logical_time, self.sender, self.recipient,
                           self.payload, self.nonce, sigs)

    @property
    def kind(self) -> PayloadKind:
        return self.payload.kind

    def encode(self) -> bytes:
        w = Writer().bytes_(self.tx_id).raw(self.body()).count(len(self.signatures))
        for signer, sig in self.signatures:
            w.bytes_(signer).bytes_(sig)
        return w.getvalue()

    @classmethod
    def decode(cls, data: bytes) -> Transaction:
        return _decode_tx(bytes(data))


def _decode_with_body(data: bytes) -> tuple[Transaction, bytes]:
    r = Reader(data)
    tx_id = r.bytes_(HASH_LEN)
    body_start = r.pos
    logical_time = r.u64()
    sender = r.bytes_(HASH_LEN)
    recipient = r.bytes_(HASH_LEN)
    payload = Payload.decode(r)
    nonce = r.u64()
    body = data[body_start:r.pos]
    n = r.count()
    if n not in (1, 2):
        raise MalformedInput(f"transaction carries {n} signatures", r.pos - 4)
    sigs = tuple((r.bytes_(HASH_LEN), r.bytes_()) for _ in range(n))
    r.expect_end()
    return Transaction(tx_id, logical_time, sender, recipient, payload, nonce, sigs), body


@lru_cache(maxsize=65536)
def _decode_tx(data: bytes) -> Transaction:
    return _decode_with_body(data)[0]


@lru_cache(maxsize=65536)
def _check_raw_tx(data: bytes) -> tuple[Transaction | None, str | None]:
    """Decode a sealed transaction and confirm its tx_id; pure, so memoised."""
    try:
        tx, body = _decode_with_body(data)
    except MalformedInput as exc:
        return None, f"undecodable: {exc}"
    if H(body) != tx.tx_id:
        return tx, "tx_id does not match body"
    return tx, None


def make_double_signed(draft: Transaction, signer_a: KeyPair, signer_b: KeyPair) -> Transaction:
    if signer_a.pseudonym == signer_b.pseudonym:
        raise DuplicateSigner("double-signing needs two distinct parties")
    return draft.signed_by(signer_a, signer_b)


def block_header_bytes(index: int, prev_hash: bytes, logical_time: int, raw_txs: Sequence[bytes]) -> bytes:
    w = Writer().u64(index).bytes_(prev_hash).u64(logical_time).count(len(raw_txs))
    for raw in raw_txs:
        w.bytes_(raw)
    return w.getvalue()


@dataclass(frozen=True)
class Block:
    index: int
    prev_hash: bytes
    logical_time: int
    raw_txs: tuple[bytes, ...]
    block_hash: bytes

    @classmethod
    def seal(cls, index: int, prev_hash: bytes, logical_time: int, raw_txs: Sequence[bytes]) -> Block:
        raw_txs = tuple(raw_txs)
        return cls(index, prev_hash, logical_time, raw_txs,
                   H(block_header_bytes(index, prev_hash, logical_time, raw_txs)))

    @property
    def txs(self) -> list[Transaction]:
        return [Transaction.decode(raw) for raw in self.raw_txs]

    def recompute_hash(self) -> bytes:
        return _block_hash(self.index, self.prev_hash, self.logical_time, self.raw_txs)


@lru_cache(maxsize=4096)
def _block_hash(index: int, prev_hash: bytes, logical_time: int, raw_txs: tuple[bytes, ...]) -> bytes:
    return H(block_header_bytes(index, prev_hash, logical_time, raw_txs))


@dataclass
class Ledger:
    registry: dict[bytes, Party] = field(default_factory=dict)
    chain: list[Block] = field(default_factory=list)
    pending: list[Transaction] = field(default_factory=list)
    double_signed_kinds: frozenset[PayloadKind] = frozenset()

    # -- parties ---------------------------------------------------------

    def register(self, role: Role, label: str, public_key: bytes) -> bytes:
        party = Party(role, label, bytes(public_key))
        existing = self.registry.get(party.pseudonym)
        if existing is not None:
            if existing.public_key != party.public_key:
                raise PseudonymCollision(party.pseudonym.hex())
            raise LedgerError(f"party {label!r} already registered")
        self.registry[party.pseudonym] = party
        return party.pseudonym

    def parties(self, role: Role) -> list[Party]:
        return [p for p in self.registry.values() if p.role is role]

    def party(self, pseudonym: bytes) -> Party | None:
        return self.registry.get(pseudonym)

    # -- writing ---------------------------------------------------------

    @property
    def last_sealed_time(self) -> int | None:
        return self.chain[-1].logical_time if self.chain else None

    def _signature_problem(self, tx: Transaction) -> str | None:
        sigs = tx.signatures
        signers = [s for s, _ in sigs]
        if len(sigs) not in (1, 2):
            return f"{len(sigs)} signatures"
        if len(set(signers)) != len(signers):
            return "duplicate signer"
        if tx.sender not in signers:
            return "sender did not sign"
        if len(sigs) == 1 and tx.kind in self.double_signed_kinds:
            return f"{tx.kind.name} must be double-signed"
        for signer, sig in sigs:
            party = self.registry.get(signer)
            if party is None:
                return f"unregistered signer {signer.hex()[:12]}"
            if not verify_signature(party.public_key, tx.tx_id, sig):
                return f"signature by {signer.hex()[:12]} does not verify"
        return None

    def submit(self, tx: Transaction) -> bytes:
        if H(tx.body()) != tx.tx_id:
            raise InvalidSignature("tx_id does not match transaction body")
        problem = self._signature_problem(tx)
        if problem:
            raise InvalidSignature(problem)
        sender = self.registry[tx.sender]
        if sender.role is not tx.payload.role:
            raise RoleViolation(f"{tx.kind.name} cannot be sent by a {sender.role.title}")
        floor = self.pending[-1].logical_time if self.pending else self.last_sealed_time
        if floor is not None and tx.logical_time < floor:
            raise TimeRegression(f"logical time {tx.logical_time} precedes {floor}")
        self.pending.append(tx)
        return tx.tx_id

    def seal_block(self, logical_time: int) -> Block:
        if self.chain and not self.pending:
            raise NothingToSeal("no pending transactions")
        floor = max([t.logical_time for t in self.pending] + [self.last_sealed_time or 0])
        if logical_time < floor:
            raise TimeRegression(f"block time {logical_time} precedes {floor}")
        prev = self.chain[-1].block_hash if self.chain else ZERO_HASH
        block = Block.seal(len(self.chain), prev, logical_time, [t.encode() for t in self.pending])
        self.chain.append(block)
        self.pending = []
        return block

    # -- reading ---------------------------------------------------------

    def sealed(self) -> Iterator[tuple[int, Transaction]]:
        for block in self.chain:
            for tx in block.txs:
                yield block.index, tx

    def query(
        self,
        sender: bytes | None = None,
        recipient: bytes | None = None,
        payload_kind: PayloadKind | Iterable[PayloadKind] | None = None,
        file_id: str | None = None,
        time_range: tuple[int, int] | None = None,
    ) -> list[tuple[int, Transaction]]:
        """Sealed transactions matching every given filter, in chain order.

        ``time_range`` is inclusive at both ends.
        """
        kinds = None
        if payload_kind is not None:
            kinds = {payload_kind} if isinstance(payload_kind, PayloadKind) else set(payload_kind)
        out = []
        for idx, tx in self.sealed():
            if sender is not None and tx.sender != sender:
                continue
            if recipient is not None and tx.recipient != recipient:
                continue
            if kinds is not None and tx.kind not in kinds:
                continue
            if file_id is not None and tx.payload.file_id != file_id:
                continue
            if time_range is not None and not time_range[0] <= tx.logical_time <= time_range[1]:
                continue
            out.append((idx, tx))
        return out

    def find(self, tx_id: bytes) -> Transaction | None:
        for _, tx in self.sealed():
            if tx.tx_id == tx_id:
                return tx
        return None

    def sealed_tx_ids(self) -> set[bytes]:
        return {tx.tx_id for _, tx in self.sealed()}

    # -- verification ----------------------------------------------------

    def verify_chain(self) -> VerifyResult:
        prev = ZERO_HASH
        for pos, block in enumerate(self.chain):
            txs = []
            for j, raw in enumerate(block.raw_txs):
                tx, problem = _check_raw_tx(raw)
                if problem:
                    return VerifyResult(pos, Reason.BadTxHash, f"tx {j} {problem}")
                txs.append(tx)
            if block.recompute_hash() != block.block_hash:
                return VerifyResult(pos, Reason.BadBlockHash)
            if block.index != pos or block.prev_hash != prev:
                return VerifyResult(pos, Reason.BadLink)
            for j, tx in enumerate(txs):
                problem = self._signature_problem(tx)
                if problem:
                    return VerifyResult(pos, Reason.BadSignature, f"tx {j}: {problem}")
            prev = block.block_hash
        return VerifyResult()

    # -- test tooling ----------------------------------------------------

    def tamper(self, block_index: int, tx_index: int, offset: int, new_byte: int) -> Ledger:
        """Return a copy with one byte of one sealed transaction replaced.

        No hash is recomputed.
        """
        if not 0 <= block_index < len(self.chain):
            raise IndexOutOfRange(f"block {block_index} out of range")
        block = self.chain[block_index]
        if not 0 <= tx_index < len(block.raw_txs):
            raise IndexOutOfRange(f"tx {tx_index} out of range in block {block_index}")
        raw = bytearray(block.raw_txs[tx_index])
        if not 0 <= offset < len(raw):
            raise IndexOutOfRange(f"offset {offset} out of range ({len(raw)} bytes)")
        if not 0 <= new_byte <= 255:
            raise ValueError("new byte must be in 0..255")
        raw[offset] = new_byte
        raw_txs = list(block.raw_txs)
        raw_txs[tx_index] = bytes(raw)
        chain = list(self.chain)
        chain[block_index] = Block(block.index, block.prev_hash, block.logical_time,
                                   tuple(raw_txs), block.block_hash)
        return Ledger(dict(self.registry), chain, list(self.pending), self.double_signed_kinds)

    # -- serialization ---------------------------------------------------

    def serialize(self) -> bytes:
        w = Writer().raw(MAGIC).u16(FORMAT_VERSION).str_(HASH_NAME)
        w.count(len(self.registry))
        for party in self.registry.values():
            w.u8(party.role).str_(party.label).bytes_(party.public_key)
        kinds = sorted(self.double_signed_kinds)
        w.count(len(kinds))
        for k in kinds:
            w.u8(k)
        w.count(len(self.chain))
        for b in self.chain:
            w.u64(b.index).bytes_(b.prev_hash).u64(b.logical_time).count(len(b.raw_txs))
            for raw in b.raw_txs:
                w.bytes_(raw)
            w.bytes_(b.block_hash)
        w.count(len(self.pending))
        for tx in self.pending:
            w.bytes_(tx.encode())
        return w.getvalue()

    @classmethod
    def deserialize(cls, data: bytes) -> Ledger:
        r = Reader(bytes(data))
        if r.data[:4] != MAGIC:
            raise MalformedInput("bad magic", 0)
        r.pos = 4
        version = r.u16()
        if version != FORMAT_VERSION:
            raise MalformedInput(f"unsupported format version {version}", 4)
        at = r.pos
        if r.str_() != HASH_NAME:
            raise MalformedInput("unsupported hash algorithm", at)
        ledger = cls()
        for _ in range(r.count()):
            at = r.pos
            try:
                role = Role(r.u8())
            except ValueError:
                raise MalformedInput("unknown role", at) from None
            label = r.str_()
            key = r.bytes_(PUBLIC_KEY_LEN)
            try:
                ledger.register(role, label, key)
            except LedgerError as exc:
                raise MalformedInput(str(exc), at) from None
        kinds = set()
        for _ in range(r.count()):
            at = r.pos
            try:
                kinds.add(PayloadKind(r.u8()))
            except ValueError:
                raise MalformedInput("unknown payload kind", at) from None
        ledger.double_signed_kinds = frozenset(kinds)
        for _ in range(r.count()):
            index = r.u64()
            prev_hash = r.bytes_(HASH_LEN)
            logical_time = r.u64()
            raw_txs = tuple(r.bytes_() for _ in range(r.count()))
            ledger.chain.append(Block(index, prev_hash, logical_time, raw_txs, r.bytes_(HASH_LEN)))
        for _ in range(r.count()):
            at = r.pos
            raw = r.bytes_()
            try:
                ledger.pending.append(Transaction.decode(raw))
            except MalformedInput as exc:
                raise MalformedInput(f"pending transaction: {exc}", at) from None
        r.expect_end()
        return ledger


def check_roles(ledger: Ledger) -> list[tuple[int, bytes]]:
    """Sealed transactions whose payload kind does not match the sender's role."""
    bad = []
    for idx, tx in ledger.sealed():
        party = ledger.party(tx.sender)
        if party is None or party.role is not tx.payload.role:
            bad.append((idx, tx.tx_id))
    return bad
