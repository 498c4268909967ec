"""Hashing, Ed25519 keys and pseudonym derivation."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache

from cryptography.exceptions import InvalidSignature as _CryptoInvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

HASH_NAME = "sha256"
HASH_LEN = 32
ZERO_HASH = bytes(HASH_LEN)


def H(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class KeyPair:
    """An Ed25519 signing key together with its raw public key bytes."""

    private: Ed25519PrivateKey = field(repr=False, compare=False)
    public_bytes: bytes

    @classmethod
    def from_seed(cls, seed: bytes) -> KeyPair:
        priv = Ed25519PrivateKey.from_private_bytes(H(seed))
        pub = priv.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        return cls(priv, pub)

    @classmethod
    def for_label(cls, role: str, label: str) -> KeyPair:
        # Keys depend only on the party, never on the scenario seed.
        return cls.from_seed(f"cfdr-party-key:{role}:{label}".encode())

    @property
    def pseudonym(self) -> bytes:
        return pseudonym_of(self.public_bytes)

    def sign(self, message: bytes) -> bytes:
        return self.private.sign(message)


def pseudonym_of(public_key_bytes: bytes) -> bytes:
    return H(public_key_bytes)


@lru_cache(maxsize=65536)
def verify_signature(public_key_bytes: bytes, message: bytes, signature: bytes) -> bool:
    """Pure, memoised Ed25519 verification."""
    try:
        Ed25519PublicKey.from_public_bytes(public_key_bytes).verify(signature, message)
    except (_CryptoInvalidSignature, ValueError):
        return False
    return True
