"""Canonical binary encoding used for hashing and for the ledger file.

Unsigned integers are big-endian (8 bytes unless noted), byte strings carry a
4-byte big-endian length prefix and lists a 4-byte big-endian count.  Decoding
is strict: every value has exactly one accepted encoding, so a decoded object
re-encodes to the bytes it came from.
"""

from __future__ import annotations

import struct
from fractions import Fraction

U64_MAX = 2**64 - 1


class MalformedInput(ValueError):
    """Raised when a byte stream is not a valid canonical encoding."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class Writer:
    def __init__(self) -> None:
        self._parts: list[bytes] = []

    def u8(self, value: int) -> Writer:
        self._parts.append(struct.pack(">B", value))
        return self

    def u16(self, value: int) -> Writer:
        self._parts.append(struct.pack(">H", value))
        return self

    def u32(self, value: int) -> Writer:
        self._parts.append(struct.pack(">I", value))
        return self

    def u64(self, value: int) -> Writer:
        if not 0 <= value <= U64_MAX:
            raise ValueError(f"value {value} does not fit in u64")
        self._parts.append(struct.pack(">Q", value))
        return self

    def bytes_(self, value: bytes) -> Writer:
        self.u32(len(value))
        self._parts.append(bytes(value))
        return self

    def str_(self, value: str) -> Writer:
        return self.bytes_(value.encode("utf-8"))

    def bool_(self, value: bool) -> Writer:
        return self.u8(1 if value else 0)

    def fraction(self, value: Fraction) -> Writer:
        if value < 0:
            raise ValueError("only non-negative rationals are encodable")
        return self.u64(value.numerator).u64(value.denominator)

    def count(self, n: int) -> Writer:
        return self.u32(n)

    def raw(self, data: bytes) -> Writer:
        self._parts.append(data)
        return self

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    def __init__(self, data: bytes, offset: int = 0) -> None:
        self.data = data
        self.pos = offset

    def _take(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise MalformedInput(f"truncated input (wanted {n} bytes)", self.pos)
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def u8(self) -> int:
        return self._take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self._take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def bytes_(self, exact: int | None = None) -> bytes:
        start = self.pos
        n = self.u32()
        if exact is not None and n != exact:
            raise MalformedInput(f"expected {exact}-byte field, got length {n}", start)
        return self._take(n)

    def str_(self) -> str:
        start = self.pos
        raw = self.bytes_()
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedInput("invalid UTF-8 string", start) from None

    def bool_(self) -> bool:
        start = self.pos
        v = self.u8()
        if v > 1:
            raise MalformedInput(f"invalid boolean byte {v}", start)
        return v == 1

    def fraction(self) -> Fraction:
        start = self.pos
        num, den = self.u64(), self.u64()
        if den == 0:
            raise MalformedInput("zero denominator", start)
        value = Fraction(num, den)
        if value.denominator != den:
            raise MalformedInput("rational not in lowest terms", start)
        return value

    def count(self) -> int:
        return self.u32()

    def at_end(self) -> bool:
        return self.pos == len(self.data)

    def expect_end(self) -> None:
        if not self.at_end():
            raise MalformedInput("trailing bytes", self.pos)
