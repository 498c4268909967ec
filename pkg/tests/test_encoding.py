from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cfdr.encoding import MalformedInput, Reader, Writer


def test_integer_and_bytes_layout():
    data = Writer().u64(1).bytes_(b"ab").count(3).u16(7).getvalue()
    assert data == bytes(7) + b"\x01" + b"\x00\x00\x00\x02ab" + b"\x00\x00\x00\x03" + b"\x00\x07"


def test_truncated_input_reports_offset():
    r = Reader(b"\x00\x00\x00\x05abc")
    with pytest.raises(MalformedInput) as err:
        r.bytes_()
    assert err.value.offset == 4


@pytest.mark.parametrize("raw", [b"\x02", b"\xff"])
def test_boolean_is_strict(raw):
    with pytest.raises(MalformedInput):
        Reader(raw).bool_()


def test_fraction_must_be_reduced():
    with pytest.raises(MalformedInput):
        Reader(Writer().u64(2).u64(4).getvalue()).fraction()
    with pytest.raises(MalformedInput):
        Reader(Writer().u64(1).u64(0).getvalue()).fraction()


@given(st.fractions(min_value=0, max_denominator=10**6).filter(lambda f: f.numerator < 2**63))
def test_fraction_round_trip(value):
    assert Reader(Writer().fraction(value).getvalue()).fraction() == value


def test_u64_range():
    with pytest.raises(ValueError):
        Writer().u64(-1)
    with pytest.raises(ValueError):
        Writer().u64(2**64)
