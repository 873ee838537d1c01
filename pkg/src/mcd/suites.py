"""Group suites: the production pairing and a transparent test pairing.

A suite bundles two source groups (slot 1 and slot 2), a target group,
canonical fixed-length encodings for all three, scalar multiplication,
and a deterministic hash-to-group.  The transparent suite carries its
discrete logs openly so tests can verify every identity exactly; it is
never accepted on the wire by any service.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any

try:
    from gmpy2 import is_prime as _is_prime
except ImportError:  # pragma: no cover
    def _is_prime(n):
        if n < 4:
            return n in (2, 3)
        for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
            if pow(p, n - 1, n) != 1:
                return False
        return True

from . import bn254 as bn

PRODUCTION_SUITE_ID = "production_pairing"
TRANSPARENT_SUITE_ID = "transparent_test_pairing"
DH_GROUP_SUITE_ID = "dh_group"

# Large enough that desk-scale identity universes avoid hash collisions.
DEFAULT_TRANSPARENT_ORDER = 2**61 - 1

HASH_ATTEMPT_CAP = 256

_H1_TAGS = {1: b"MCD-H1-s1-v1", 2: b"MCD-H1-s2-v1"}


class SuiteError(Exception):
    pass


class SuiteMismatchError(SuiteError):
    """Inputs from different suites (or wrong slots) were combined."""


@dataclass(frozen=True, order=True)
class SourcePoint:
    """A source-group element with its canonical encoding.

    Ordering and equality are on (suite, slot, encoding); the raw
    in-memory representation is carried along for computation only.
    """

    suite_id: str
    slot: int
    enc: bytes
    raw: Any = field(compare=False, repr=False)

    def hex(self) -> str:
        return self.enc.hex()


@dataclass(frozen=True, order=True)
class TargetElement:
    suite_id: str
    enc: bytes
    raw: Any = field(compare=False, repr=False)

    def hex(self) -> str:
        return self.enc.hex()


def _hash_stream(tag: bytes, msg: bytes, counter: int, block: int = 0) -> bytes:
    return hashlib.sha256(tag + msg + bytes([counter, block])).digest()


class TransparentSuite:
    """Discrete-log-known toy pairing over (Z_q, +) exponent carriers.

    A slot point with exponent a stands for a*P_slot; the pairing of
    exponents a and b is the target exponent a*b mod q.  Every identity
    the protocol relies on is checkable by plain modular arithmetic.
    """

    suite_id = TRANSPARENT_SUITE_ID

    def __init__(self, order: int = DEFAULT_TRANSPARENT_ORDER):
        if order < 5 or not _is_prime(order):
            raise SuiteError(f"transparent suite order must be prime, got {order}")
        self.order = int(order)
        self.gen1 = self._point(1, 1)
        self.gen2 = self._point(2, 1)
        self.target_identity = self._target(0)

    def _point(self, slot: int, exponent: int) -> SourcePoint:
        exponent %= self.order
        enc = bytes([slot]) + exponent.to_bytes(8, "big")
        return SourcePoint(self.suite_id, slot, enc, exponent)

    def _target(self, exponent: int) -> TargetElement:
        exponent %= self.order
        return TargetElement(self.suite_id, b"\x03" + exponent.to_bytes(8, "big"), exponent)

    def point_len(self, slot: int) -> int:
        return 9

    def hash_to_point(self, msg: bytes, slot: int) -> SourcePoint:
        if slot not in (1, 2):
            raise SuiteError(f"bad slot {slot}")
        for ctr in range(HASH_ATTEMPT_CAP):
            h = _hash_stream(_H1_TAGS[slot], msg, ctr)
            exp = 1 + int.from_bytes(h, "big") % (self.order - 1)
            if exp == 1:  # the published generator
                continue
            return self._point(slot, exp)
        raise SuiteError("hash-to-group attempt cap exceeded")

    def scalar_mul(self, point: SourcePoint, k: int) -> SourcePoint:
        self._check(point)
        return self._point(point.slot, point.raw * k % self.order)

    def pair(self, a: SourcePoint, b: SourcePoint) -> TargetElement:
        self._check(a, slot=1)
        self._check(b, slot=2)
        return self._target(a.raw * b.raw % self.order)

    def decode_point(self, data: bytes, slot: int) -> SourcePoint:
        if len(data) != 9 or data[0] != slot:
            raise SuiteError("bad transparent point encoding")
        exp = int.from_bytes(data[1:], "big")
        if exp >= self.order:
            raise SuiteError("transparent exponent out of range")
        return self._point(slot, exp)

    def random_scalar(self, rng) -> int:
        return rng.randrange(1, self.order)

    def dlog(self, el) -> int:
        """Test oracle: the discrete log of a point or target element."""
        return el.raw

    def _check(self, point: SourcePoint, slot: int | None = None):
        if point.suite_id != self.suite_id:
            raise SuiteMismatchError(f"expected {self.suite_id}, got {point.suite_id}")
        if slot is not None and point.slot != slot:
            raise SuiteMismatchError(f"expected slot {slot} point")


class Bn254Suite:
    """Production pairing suite on the BN254 curve."""

    suite_id = PRODUCTION_SUITE_ID

    def __init__(self):
        self.order = int(bn.ORDER)
        self.gen1 = self._wrap1(bn.G1_GEN)
        self.gen2 = self._wrap2(bn.G2_GEN)

    def _wrap1(self, raw) -> SourcePoint:
        return SourcePoint(self.suite_id, 1, bn.g1_compress(raw), raw)

    def _wrap2(self, raw) -> SourcePoint:
        return SourcePoint(self.suite_id, 2, bn.g2_compress(raw), raw)

    def point_len(self, slot: int) -> int:
        return bn.G1_ENC_LEN if slot == 1 else bn.G2_ENC_LEN

    def hash_to_point(self, msg: bytes, slot: int) -> SourcePoint:
        # Try-and-increment with a counter byte, then cofactor clearing
        # on slot 2 (slot 1 has cofactor 1).
        if slot == 1:
            for ctr in range(HASH_ATTEMPT_CAP):
                h = _hash_stream(_H1_TAGS[1], msg, ctr)
                x = bn.mpz(int.from_bytes(h, "big") % int(bn.P))
                y = bn.fp_sqrt((x * x * x + bn.CURVE_B) % bn.P)
                if y is None:
                    continue
                if (int(y) & 1) != (h[0] & 1):
                    y = (-y) % bn.P
                pt = (x, bn.mpz(y))
                if pt == bn.G1_GEN:
                    continue
                return self._wrap1(pt)
        elif slot == 2:
            for ctr in range(HASH_ATTEMPT_CAP):
                h0 = _hash_stream(_H1_TAGS[2], msg, ctr, 0)
                h1 = _hash_stream(_H1_TAGS[2], msg, ctr, 1)
                x = (
                    bn.mpz(int.from_bytes(h0, "big") % int(bn.P)),
                    bn.mpz(int.from_bytes(h1, "big") % int(bn.P)),
                )
                y = bn.f2_sqrt(bn.f2_add(bn.f2_mul(bn.f2_sqr(x), x), bn.TWIST_B))
                if y is None:
                    continue
                par = (int(y[0]) & 1) if y[0] != 0 else (int(y[1]) & 1)
                if par != (h0[0] & 1):
                    y = bn.f2_neg(y)
                pt = bn.g2_clear_cofactor((x, y))
                if pt is None or pt == bn.G2_GEN:
                    continue
                return self._wrap2(pt)
        else:
            raise SuiteError(f"bad slot {slot}")
        raise SuiteError("hash-to-group attempt cap exceeded")

    def scalar_mul(self, point: SourcePoint, k: int) -> SourcePoint:
        self._check(point)
        if point.slot == 1:
            return self._wrap1(bn.g1_mul(point.raw, k))
        return self._wrap2(bn.g2_mul(point.raw, k))

    def pair(self, a: SourcePoint, b: SourcePoint) -> TargetElement:
        self._check(a, slot=1)
        self._check(b, slot=2)
        el = bn.pairing(a.raw, b.raw)
        return TargetElement(self.suite_id, bn.gt_encode(el), el)

    def decode_point(self, data: bytes, slot: int) -> SourcePoint:
        try:
            if slot == 1:
                return self._wrap1(bn.g1_decompress(data))
            if slot == 2:
                pt = bn.g2_decompress(data)
                if pt is not None and not bn.g2_in_subgroup(pt):
                    raise SuiteError("G2 point not in the prime-order subgroup")
                return self._wrap2(pt)
        except ValueError as exc:
            raise SuiteError(str(exc)) from exc
        raise SuiteError(f"bad slot {slot}")

    def random_scalar(self, rng) -> int:
        return rng.randrange(1, self.order)

    def _check(self, point: SourcePoint, slot: int | None = None):
        if point.suite_id != self.suite_id:
            raise SuiteMismatchError(f"expected {self.suite_id}, got {point.suite_id}")
        if slot is not None and point.slot != slot:
            raise SuiteMismatchError(f"expected slot {slot} point")


_PRODUCTION_SINGLETON: Bn254Suite | None = None


def get_suite(suite_id: str, order: int | None = None):
    """Suite factory.  `order` applies to the transparent suite only."""
    global _PRODUCTION_SINGLETON
    if suite_id == PRODUCTION_SUITE_ID:
        if order is not None and order != int(bn.ORDER):
            raise SuiteError("production suite order is fixed by the curve")
        if _PRODUCTION_SINGLETON is None:
            _PRODUCTION_SINGLETON = Bn254Suite()
        return _PRODUCTION_SINGLETON
    if suite_id == TRANSPARENT_SUITE_ID:
        return TransparentSuite(order or DEFAULT_TRANSPARENT_ORDER)
    raise SuiteError(f"unknown suite id {suite_id!r}")
