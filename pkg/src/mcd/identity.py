"""Canonical member identifiers and unambiguous byte concatenation."""

from __future__ import annotations

from dataclasses import dataclass

MAX_IDENTITY_BYTES = 64
_MAX_PART = 2**32 - 1


class IdentityError(ValueError):
    """Raised for identifier strings that cannot be canonicalized."""


@dataclass(frozen=True, order=True)
class Identity:
    """A canonical, low-entropy member identifier (phone-number-like).

    The value is stripped of surrounding whitespace at construction;
    canonicalization is idempotent.  Ordering and equality follow the
    UTF-8 byte encoding (which for str comparison is code-point order).
    """

    value: str

    def __post_init__(self):
        canonical = self.value.strip()
        if canonical != self.value:
            object.__setattr__(self, "value", canonical)
        if not self.value:
            raise IdentityError("identity must be nonempty")
        if len(self.value.encode("utf-8")) > MAX_IDENTITY_BYTES:
            raise IdentityError(f"identity exceeds {MAX_IDENTITY_BYTES} utf-8 bytes")

    def encode(self) -> bytes:
        """Length-prefixed byte form used as hash input (4-byte BE length)."""
        raw = self.value.encode("utf-8")
        return len(raw).to_bytes(4, "big") + raw

    def raw_bytes(self) -> bytes:
        return self.value.encode("utf-8")

    def __str__(self) -> str:
        return self.value


def concat_unambiguous(x: bytes, y: bytes) -> bytes:
    """Concatenate two byte strings so the result decomposes uniquely.

    Each part is preceded by a 4-byte big-endian length, making the
    mapping (x, y) -> bytes injective.
    """
    for part in (x, y):
        if len(part) > _MAX_PART:
            raise ValueError("part exceeds 2^32-1 bytes")
    return (
        len(x).to_bytes(4, "big") + x + len(y).to_bytes(4, "big") + y
    )


def decompose(data: bytes) -> tuple[bytes, bytes]:
    """Recover the exact (x, y) pair from concat_unambiguous output."""
    parts = []
    off = 0
    for _ in range(2):
        if off + 4 > len(data):
            raise ValueError("malformed: truncated length prefix")
        n = int.from_bytes(data[off : off + 4], "big")
        off += 4
        if off + n > len(data):
            raise ValueError("malformed: truncated part")
        parts.append(data[off : off + n])
        off += n
    if off != len(data):
        raise ValueError("malformed: trailing bytes")
    return parts[0], parts[1]
