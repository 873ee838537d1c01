import pytest

from mcd.identity import Identity, IdentityError, concat_unambiguous, decompose


def test_canonicalization_strips_and_is_idempotent():
    a = Identity("  +31612345678 ")
    assert a.value == "+31612345678"
    assert Identity(a.value) == a


def test_rejects_empty_and_oversized():
    with pytest.raises(IdentityError):
        Identity("   ")
    with pytest.raises(IdentityError):
        Identity("x" * 65)


def test_encode_is_length_prefixed():
    a = Identity("alice")
    assert a.encode() == b"\x00\x00\x00\x05alice"


def test_ordering_matches_byte_order():
    ids = [Identity("bob"), Identity("alice"), Identity("+31")]
    assert sorted(ids) == sorted(ids, key=lambda i: i.raw_bytes())


def test_concat_round_trip():
    assert decompose(concat_unambiguous(b"a", b"b")) == (b"a", b"b")
    assert decompose(concat_unambiguous(b"", b"xy")) == (b"", b"xy")


def test_concat_injective():
    assert concat_unambiguous(b"ab", b"c") != concat_unambiguous(b"a", b"bc")


def test_decompose_rejects_malformed():
    with pytest.raises(ValueError):
        decompose(b"\x00\x01\x02")
    with pytest.raises(ValueError):
        decompose(concat_unambiguous(b"a", b"b") + b"!")
    with pytest.raises(ValueError):
        decompose(b"\x00\x00\x00\x05al")
