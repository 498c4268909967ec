"""Parties and the channel through which they post ledger transactions."""

from __future__ import annotations

from dataclasses import dataclass, field

from .crypto import KeyPair
from .ledger import Ledger, Transaction
from .payloads import Payload, PayloadKind, Role


@dataclass
class Actor:
    role: Role
    label: str
    keys: KeyPair = field(repr=False)
    nonce: int = 0

    @classmethod
    def create(cls, role: Role, label: str, **kwargs) -> Actor:
        return cls(role, label, KeyPair.for_label(role.name, label), **kwargs)

    @property
    def pseudonym(self) -> bytes:
        return self.keys.pseudonym

    def next_nonce(self) -> int:
        n = self.nonce
        self.nonce += 1
        return n


@dataclass
class Channel:
    """Single writer for a ledger: assigns logical time and seals blocks.

    Logical time is one tick per transaction, continuing from the latest
    time already on the ledger.  A block is sealed automatically once the
    pending pool reaches ``max_block_size``.
    """

    ledger: Ledger
    max_block_size: int = 16
    posted: list[bytes] = field(default_factory=list)

    def now(self) -> int:
        if self.ledger.pending:
            return self.ledger.pending[-1].logical_time
        return self.ledger.last_sealed_time or 0

    def register(self, *actors: Actor) -> None:
        for a in actors:
            if a.pseudonym not in self.ledger.registry:
                self.ledger.register(a.role, a.label, a.keys.public_bytes)

    def post(self, sender: Actor, recipient: Actor | bytes, payload: Payload) -> bytes:
        to = recipient if isinstance(recipient, bytes) else recipient.pseudonym
        draft = Transaction.draft(self.now() + 1, sender.pseudonym, to, payload, sender.next_nonce())
        if payload.kind in self.ledger.double_signed_kinds and isinstance(recipient, Actor):
            tx = draft.signed_by(sender.keys, recipient.keys)
        else:
            tx = draft.signed_by(sender.keys)
        tx_id = self.ledger.submit(tx)
        self.posted.append(tx_id)
        if len(self.ledger.pending) >= self.max_block_size:
            self.seal()
        return tx_id

    def seal(self) -> None:
        """Seal pending transactions (or the genesis block on an empty chain)."""
        if self.ledger.pending or not self.ledger.chain:
            self.ledger.seal_block(self.now())

    @property
    def double_signed_kinds(self) -> frozenset[PayloadKind]:
        return self.ledger.double_signed_kinds
