import hashlib
import struct

import pytest

from cfdr.crypto import KeyPair
from cfdr.encoding import MalformedInput
from cfdr.ledger import (
    IndexOutOfRange,
    InvalidSignature,
    Ledger,
    NothingToSeal,
    Reason,
    RoleViolation,
    TimeRegression,
    Transaction,
    Block,
    check_roles,
)
from cfdr.payloads import DeleteAck, PayloadKind, ReadReq, UploadInit
from cfdr.protocol import run_delete, run_read, run_upload

from conftest import make_world


def lp(b: bytes) -> bytes:
    return struct.pack(">I", len(b)) + b


def sha(b: bytes) -> bytes:
    return hashlib.sha256(b).digest()


def signed(world, sender, recipient, payload, t, nonce=0, signer=None):
    draft = Transaction.draft(t, sender.pseudonym, recipient.pseudonym, payload, nonce)
    return draft.signed_by((signer or sender).keys)


def three_block_ledger(world):
    run_upload(world.user, world.cloud, world.channel, "F", b"hello world")
    world.channel.seal()
    run_read(world.user, world.cloud, world.channel, "F")
    world.channel.seal()
    run_delete(world.user, world.cloud, world.channel, "F")
    world.channel.seal()
    return world.ledger


def test_submit_returns_independently_recomputed_tx_id(world):
    tx = signed(world, world.user, world.cloud, UploadInit("F"), t=1, nonce=0)
    receipt = world.ledger.submit(tx)
    body = (struct.pack(">Q", 1) + lp(world.user.pseudonym) + lp(world.cloud.pseudonym)
            + b"\x01" + lp(b"F") + struct.pack(">Q", 0))
    assert receipt == sha(body)


def test_pseudonym_is_hash_of_public_key():
    k = KeyPair.for_label("USER", "alice")
    assert k.pseudonym == sha(k.public_bytes)
    assert KeyPair.for_label("USER", "bob").pseudonym != k.pseudonym


def test_submit_rejects_foreign_signature(world):
    tx = signed(world, world.user, world.cloud, UploadInit("F"), t=1, signer=world.cloud)
    with pytest.raises(InvalidSignature):
        world.ledger.submit(tx)


def test_submit_rejects_time_regression(world):
    run_upload(world.user, world.cloud, world.channel, "F", b"x")
    world.ledger.seal_block(9)
    tx = signed(world, world.user, world.cloud, ReadReq("F"), t=5, nonce=7)
    with pytest.raises(TimeRegression):
        world.ledger.submit(tx)


def test_submit_rejects_wrong_role(world):
    tx = signed(world, world.user, world.cloud, DeleteAck("F"), t=1)
    with pytest.raises(RoleViolation):
        world.ledger.submit(tx)


def test_genesis_block():
    ledger = Ledger()
    block = ledger.seal_block(0)
    assert block.index == 0 and block.prev_hash == bytes(32) and block.raw_txs == ()


def test_second_block_links_to_independently_hashed_genesis(world):
    genesis = world.ledger.chain[0]
    expected_genesis = sha(struct.pack(">Q", 0) + lp(bytes(32)) + struct.pack(">Q", 0) + struct.pack(">I", 0))
    assert genesis.block_hash == expected_genesis
    run_upload(world.user, world.cloud, world.channel, "F", b"data")
    block = world.ledger.seal_block(world.channel.now())
    assert block.index == 1 and block.prev_hash == expected_genesis and len(block.raw_txs) == 4
    hand = (struct.pack(">Q", 1) + lp(expected_genesis) + struct.pack(">Q", block.logical_time)
            + struct.pack(">I", 4) + b"".join(lp(raw) for raw in block.raw_txs))
    assert block.block_hash == sha(hand)


def test_nothing_to_seal(world):
    with pytest.raises(NothingToSeal):
        world.ledger.seal_block(5)


def test_verify_honest_chain(world):
    ledger = three_block_ledger(world)
    assert len(ledger.chain) == 4
    assert ledger.verify_chain().ok


def test_payload_byte_flip_detected_in_that_block(world):
    ledger = three_block_ledger(world)
    raw = ledger.chain[1].raw_txs[0]
    # the file id "F" is the last byte before the 8-byte nonce
    offset = len(Transaction.decode(raw).body()) + 36 - 9
    assert raw[offset:offset + 1] == b"F"
    result = ledger.tamper(1, 0, offset, ord("G")).verify_chain()
    assert result.block_index == 1
    assert result.reason in (Reason.BadTxHash, Reason.BadBlockHash)


def test_self_consistent_forged_block_breaks_next_link(world):
    ledger = three_block_ledger(world)
    original = ledger.chain[1]
    forged = Block.seal(1, original.prev_hash, original.logical_time, original.raw_txs[:2])
    assert forged.block_hash != original.block_hash
    chain = list(ledger.chain)
    chain[1] = forged
    result = Ledger(ledger.registry, chain, [], ledger.double_signed_kinds).verify_chain()
    assert (result.block_index, result.reason) == (2, Reason.BadLink)


def test_tamper_first_byte_and_identity(world):
    ledger = three_block_ledger(world)
    # rebuild so that block 0 itself holds transactions
    rebuilt = Ledger(ledger.registry)
    rebuilt.pending = ledger.chain[1].txs
    rebuilt.seal_block(ledger.chain[1].logical_time)
    assert rebuilt.verify_chain().ok
    assert rebuilt.tamper(0, 0, 0, 0xFF).verify_chain().block_index == 0
    same = rebuilt.chain[0].raw_txs[0][5]
    assert rebuilt.tamper(0, 0, 5, same).verify_chain().ok


def test_tamper_out_of_range(world):
    ledger = three_block_ledger(world)
    for args in [(9, 0, 0, 0), (1, 9, 0, 0), (1, 0, 10**6, 0)]:
        with pytest.raises(IndexOutOfRange):
            ledger.tamper(*args)


def test_tamper_leaves_original_untouched(world):
    ledger = three_block_ledger(world)
    before = ledger.serialize()
    ledger.tamper(1, 0, 3, 0)
    assert ledger.serialize() == before


def test_exhaustive_mutations_on_small_ledger(world):
    run_upload(world.user, world.cloud, world.channel, "F", b"")
    world.channel.seal()
    ledger = world.ledger
    raw = ledger.chain[1].raw_txs[0]
    for offset in range(len(raw)):
        for value in range(256):
            result = ledger.tamper(1, 0, offset, value).verify_chain()
            assert result.ok == (value == raw[offset]), (offset, value)


def test_query_filters(world):
    assert Ledger().query(file_id="F") == []
    run_upload(world.user, world.cloud, world.channel, "F", b"abc")
    world.channel.seal()
    hits = world.ledger.query(file_id="F")
    assert [tx.kind.name for _, tx in hits] == ["UploadInit", "UploadAck", "UploadDone", "DigestAck"]
    run_delete(world.user, world.cloud, world.channel, "F")
    assert world.ledger.query(payload_kind=PayloadKind.DeleteAck) == []  # still pending
    world.channel.seal()
    assert len(world.ledger.query(payload_kind=PayloadKind.DeleteAck)) == 1
    assert len(world.ledger.query(sender=world.cloud.pseudonym, file_id="F")) == 3
    assert len(world.ledger.query(time_range=(2, 3))) == 2


def test_query_results_stable_as_chain_grows(world):
    run_upload(world.user, world.cloud, world.channel, "F", b"abc")
    world.channel.seal()
    first = world.ledger.query(file_id="F")
    run_read(world.user, world.cloud, world.channel, "G")
    world.channel.seal()
    assert world.ledger.query(file_id="F") == first


def test_serialize_round_trip(world):
    ledger = three_block_ledger(world)
    run_read(world.user, world.cloud, world.channel, "F")  # leaves pending txs
    data = ledger.serialize()
    assert data[:4] == b"CFDR" and data[4:6] == b"\x00\x01" and data[6:16] == lp(b"sha256")
    copy = Ledger.deserialize(data)
    assert copy == ledger
    assert copy.serialize() == data
    assert copy.verify_chain() == ledger.verify_chain()


def test_tampered_ledger_survives_round_trip_and_still_fails(world):
    ledger = three_block_ledger(world).tamper(2, 1, 0, 0xFF)
    copy = Ledger.deserialize(ledger.serialize())
    assert copy.verify_chain() == ledger.verify_chain()
    assert not copy.verify_chain().ok


@pytest.mark.parametrize("cut", [0, 3, 10, 200, -1])
def test_truncated_stream_is_malformed(world, cut):
    data = three_block_ledger(world).serialize()
    with pytest.raises(MalformedInput):
        Ledger.deserialize(data[:cut])


def test_trailing_garbage_is_malformed(world):
    with pytest.raises(MalformedInput):
        Ledger.deserialize(three_block_ledger(world).serialize() + b"\x00")


def test_no_public_key_on_chain(world):
    ledger = three_block_ledger(world)
    keys = [p.public_key for p in ledger.registry.values()]
    for block in ledger.chain:
        for raw in block.raw_txs:
            assert not any(k in raw for k in keys)


def test_roles_respected(world):
    assert check_roles(three_block_ledger(world)) == []


def test_sealing_is_deterministic():
    a, b = make_world(), make_world()
    for w in (a, b):
        three_block_ledger(w)
    assert a.ledger.serialize() == b.ledger.serialize()
