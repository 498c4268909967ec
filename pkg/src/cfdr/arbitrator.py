"""Dispute adjudication over sealed ledger contents.

The same functions serve the in-process smart contract and an external third
party reading a ledger file: a verdict depends only on the sealed chain and
the explicit arguments.  Chain order (block order, then position inside the
block) is the total order used for "before" and "after".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from .crypto import H
from .ledger import Ledger, LedgerError, Transaction
from .payloads import PayloadKind, Verdict, VerdictRecord, Violation

if TYPE_CHECKING:
    from .actors import Actor, Channel
    from .sla_oracle import SlaSpec

K = PayloadKind


class MissingPrerequisiteTxs(LedgerError):
    pass


class InconsistentVerdict(LedgerError):
    pass


@dataclass(frozen=True)
class OutOfBandCopyFound:
    """A copy of a file's ciphertext discovered outside the ledger."""

    file_id: str
    ciphertext: bytes
    provenance: str = ""

    @property
    def digest(self) -> bytes:
        return H(self.ciphertext)


def compensation_for(violation: Violation, sla: SlaSpec | None = None,
                     achieved_fraction: Fraction | None = None) -> int:
    from .sla_oracle import DEFAULT_SLA

    sla = sla or DEFAULT_SLA
    if violation in (Violation.DataLoss, Violation.DataAlteration, Violation.UnauthorizedRetention):
        return sla.base_penalty
    if violation is Violation.SlaPercentileBreach:
        if achieved_fraction is None:
            raise ValueError("a percentile breach needs the achieved fraction")
        shortfall = max(Fraction(0), sla.required_fraction - achieved_fraction)
        return sla.base_penalty + sla.penalty_rate * math.ceil(100 * shortfall)
    return 0


# -- history helpers ------------------------------------------------------

def file_history(ledger: Ledger, file_id: str) -> list[Transaction]:
    """Sealed upload/delete/read transactions for one file, in chain order."""
    kinds = (K.UploadInit, K.UploadAck, K.UploadDone, K.DigestAck, K.DeleteReq,
             K.DeleteAck, K.ReadReq, K.ReadGrant, K.ReadMissing)
    return [tx for _, tx in ledger.query(payload_kind=kinds, file_id=file_id)]


def _position(history: list[Transaction], tx_id: bytes) -> int | None:
    for i, tx in enumerate(history):
        if tx.tx_id == tx_id:
            return i
    return None


def accepted_uploads(history: list[Transaction]) -> list[tuple[int, Transaction, Transaction]]:
    """(position of DigestAck, UploadDone, DigestAck{true}) for each confirmed upload."""
    out = []
    done = None
    for i, tx in enumerate(history):
        if tx.kind is K.UploadDone:
            done = tx
        elif tx.kind is K.DigestAck and done is not None:
            if tx.payload.accept:
                out.append((i, done, tx))
            done = None
    return out


def latest_accepted(history: list[Transaction], before: int) -> tuple[int, Transaction, Transaction] | None:
    found = [a for a in accepted_uploads(history) if a[0] < before]
    return found[-1] if found else None


def acknowledged_deletes(history: list[Transaction]) -> list[tuple[int, Transaction, Transaction]]:
    """(position of DeleteAck, DeleteReq, DeleteAck) for each acknowledged delete."""
    out = []
    req = None
    for i, tx in enumerate(history):
        if tx.kind is K.DeleteReq:
            req = tx
        elif tx.kind is K.DeleteAck and req is not None:
            out.append((i, req, tx))
            req = None
    return out


def latest_accepted_digest(ledger: Ledger, file_id: str) -> bytes | None:
    history = file_history(ledger, file_id)
    last = latest_accepted(history, len(history))
    return last[1].payload.digest if last else None


# -- adjudication ---------------------------------------------------------

def adjudicate_missing(ledger: Ledger, file_id: str, read_req_tx_id: bytes,
                       sla: SlaSpec | None = None) -> Verdict:
    history = file_history(ledger, file_id)
    p = _position(history, read_req_tx_id)
    if p is None or history[p].kind is not K.ReadReq:
        raise MissingPrerequisiteTxs(f"no ReadReq {read_req_tx_id.hex()[:12]} for {file_id!r}")
    req = history[p]
    missing = next((tx for tx in history[p + 1:] if tx.kind is K.ReadMissing), None)
    if missing is None:
        raise MissingPrerequisiteTxs(f"no ReadMissing answers the read of {file_id!r}")
    user, cloud = req.sender, req.recipient
    tail = (req.tx_id, missing.tx_id)

    accepted = latest_accepted(history, p)
    if accepted is None:
        inits = [i for i, tx in enumerate(history[:p]) if tx.kind is K.UploadInit]
        if inits:
            init = inits[-1]
            acked = any(tx.kind is K.UploadAck for tx in history[init + 1:p])
            if not acked:
                # Custody never began: the cloud never acknowledged the upload.
                return Verdict(Violation.NoViolation, None, 0, (history[init].tx_id,) + tail, file_id)
        return Verdict(Violation.UserAtFault, user, 0, tail, file_id)

    pos, done, ack = accepted
    for dpos, dreq, dack in acknowledged_deletes(history[:p]):
        if dpos > pos and history.index(dreq) > pos:
            evidence = (done.tx_id, ack.tx_id, dreq.tx_id, dack.tx_id) + tail
            return Verdict(Violation.NoViolation, None, 0, evidence, file_id)
    return Verdict(Violation.DataLoss, cloud, compensation_for(Violation.DataLoss, sla),
                   (done.tx_id, ack.tx_id) + tail, file_id)


def adjudicate_altered(ledger: Ledger, file_id: str, read_grant_tx_id: bytes,
                       sla: SlaSpec | None = None) -> Verdict:
    history = file_history(ledger, file_id)
    p = _position(history, read_grant_tx_id)
    if p is None or history[p].kind is not K.ReadGrant:
        raise MissingPrerequisiteTxs(f"no ReadGrant {read_grant_tx_id.hex()[:12]} for {file_id!r}")
    grant = history[p]
    accepted = latest_accepted(history, p)
    if accepted is None:
        return Verdict(Violation.UserAtFault, grant.recipient, 0, (grant.tx_id,), file_id)
    _, done, ack = accepted
    evidence = (done.tx_id, ack.tx_id, grant.tx_id)
    if grant.payload.digest != done.payload.digest:
        return Verdict(Violation.DataAlteration, grant.sender,
                       compensation_for(Violation.DataAlteration, sla), evidence, file_id)
    return Verdict(Violation.NoViolation, None, 0, evidence, file_id)


def adjudicate_retention(ledger: Ledger, file_id: str, evidence: OutOfBandCopyFound,
                         sla: SlaSpec | None = None) -> Verdict:
    history = file_history(ledger, file_id)
    deletes = acknowledged_deletes(history)
    if not deletes:
        return Verdict(Violation.NoViolation, None, 0, (), file_id)
    dpos, dreq, dack = deletes[-1]
    accepted = accepted_uploads(history)
    if any(pos > dpos for pos, _, _ in accepted):
        # Re-uploaded after the delete: holding a copy is legitimate again.
        return Verdict(Violation.NoViolation, None, 0, (), file_id)
    for pos, done, ack in reversed(accepted):
        if done.payload.digest == evidence.digest:
            return Verdict(Violation.UnauthorizedRetention, dack.sender,
                           compensation_for(Violation.UnauthorizedRetention, sla),
                           (done.tx_id, ack.tx_id, dreq.tx_id, dack.tx_id), file_id)
    return Verdict(Violation.NoViolation, None, 0, (), file_id)


def latest_read(ledger: Ledger, file_id: str, answered_by: PayloadKind) -> bytes:
    """tx_id of the latest ReadReq (for ReadMissing) or ReadGrant answering a read of the file."""
    history = file_history(ledger, file_id)
    if answered_by is K.ReadGrant:
        grants = [tx for tx in history if tx.kind is K.ReadGrant]
        if not grants:
            raise MissingPrerequisiteTxs(f"no ReadGrant for {file_id!r}")
        return grants[-1].tx_id
    found = None
    req = None
    for tx in history:
        if tx.kind is K.ReadReq:
            req = tx
        elif tx.kind is K.ReadMissing and req is not None:
            found = req
            req = None
    if found is None:
        raise MissingPrerequisiteTxs(f"no missing read recorded for {file_id!r}")
    return found.tx_id


def adjudicate(ledger: Ledger, kind: str, file_id: str, sla: SlaSpec | None = None,
               evidence: OutOfBandCopyFound | None = None) -> Verdict:
    """Third-party entry point: pick the disputed event for the file and rule on it."""
    if kind == "missing":
        return adjudicate_missing(ledger, file_id, latest_read(ledger, file_id, K.ReadMissing), sla)
    if kind == "altered":
        return adjudicate_altered(ledger, file_id, latest_read(ledger, file_id, K.ReadGrant), sla)
    if kind == "retention":
        if evidence is None:
            raise ValueError("retention disputes need out-of-band evidence")
        return adjudicate_retention(ledger, file_id, evidence, sla)
    raise ValueError(f"unknown dispute kind {kind!r}")


def check_verdict(ledger: Ledger, verdict: Verdict) -> None:
    sealed = ledger.sealed_tx_ids()
    unknown = [t.hex()[:12] for t in verdict.evidence if t not in sealed]
    if unknown:
        raise InconsistentVerdict(f"evidence not on the sealed chain: {', '.join(unknown)}")


def record_verdict(channel: Channel, contract: Actor, verdict: Verdict) -> bytes:
    """Post a verdict on-chain from the contract's pseudonym.

    The recipient is the responsible party, or the contract itself when
    nobody is at fault.
    """
    check_verdict(channel.ledger, verdict)
    recipient = verdict.responsible if verdict.responsible is not None else contract.pseudonym
    return channel.post(contract, recipient, VerdictRecord(verdict))


def recorded_verdicts(ledger: Ledger, file_id: str | None = None) -> list[Verdict]:
    return [tx.payload.verdict
            for _, tx in ledger.query(payload_kind=K.VerdictRecord, file_id=file_id)]


def format_verdicts(verdicts: list[Verdict]) -> str:
    return "".join(v.report_line() + "\n" for v in verdicts)
