"""Protocol hash primitives: identity-to-group, augmented tokens, KDF."""

from __future__ import annotations

import hashlib
import re
import time
from dataclasses import dataclass, field

from .identity import Identity
from .suites import SourcePoint, SuiteMismatchError, TargetElement

H2_TAG = b"MCD-H2-v1"
DEFAULT_TOKEN_BITS = 256

KDF_TAG = b"MCD-KDF-v1"
PRODUCTION_MIN_COST = 4

_TOKEN_RE = re.compile(r"^[0-9a-f]+$")


def hash_to_points(identity: Identity, suite) -> tuple[SourcePoint, SourcePoint]:
    """Hash an identity into both source groups (slot 1, slot 2)."""
    msg = identity.encode()
    return suite.hash_to_point(msg, 1), suite.hash_to_point(msg, 2)


def h2(t, first: SourcePoint, second: SourcePoint, n_bits: int = DEFAULT_TOKEN_BITS) -> str:
    """Raw augmented-token hash over canonical encodings, hex output."""
    if n_bits % 8 or not 0 < n_bits <= 256:
        raise ValueError("n_bits must be a positive multiple of 8, at most 256")
    digest = hashlib.sha256(H2_TAG + t.enc + first.enc + second.enc).digest()
    return digest[: n_bits // 8].hex()


def ordered_h2(t, y: SourcePoint, z: SourcePoint, n_bits: int = DEFAULT_TOKEN_BITS) -> str:
    """h2 made symmetric in (y, z) via the global order on encodings."""
    if y.suite_id != z.suite_id or y.slot != z.slot:
        raise SuiteMismatchError("ordered_h2 arguments must share a suite and slot")
    lo, hi = (y, z) if y.enc <= z.enc else (z, y)
    return h2(t, lo, hi, n_bits)


def token_hex_len(n_bits: int = DEFAULT_TOKEN_BITS) -> int:
    return n_bits // 4


def is_token(s, n_bits: int = DEFAULT_TOKEN_BITS) -> bool:
    return isinstance(s, str) and len(s) == n_bits // 4 and bool(_TOKEN_RE.match(s))


def random_token(rng, n_bits: int = DEFAULT_TOKEN_BITS) -> str:
    return rng.getrandbits(n_bits).to_bytes(n_bits // 8, "big").hex()


@dataclass(frozen=True)
class KdfParams:
    """Tunable-cost KDF parameters.

    cost selects the scrypt work factor N = 2**(10 + cost).  Cost 0 is
    only legal in the test profile; production demands a real work
    factor.  Distinct domain tags yield unrelated outputs.
    """

    cost: int = 0
    domain_tag: bytes = KDF_TAG
    profile: str = "test"

    def __post_init__(self):
        if self.cost < 0:
            raise ValueError("cost must be nonnegative")
        if self.profile not in ("test", "production"):
            raise ValueError(f"unknown KDF profile {self.profile!r}")
        if self.profile == "production" and self.cost < PRODUCTION_MIN_COST:
            raise ValueError(f"production profile requires cost >= {PRODUCTION_MIN_COST}")


def kdf(data: bytes, params: KdfParams) -> bytes:
    """Memory-hard 256-bit digest (scrypt) with tunable cost."""
    n = 2 ** (10 + params.cost)
    return hashlib.scrypt(
        data,
        salt=params.domain_tag,
        n=n,
        r=8,
        p=1,
        maxmem=256 * n + 1024 * n,  # 128*r*n plus headroom
        dklen=32,
    )


def calibrate_cost(target_seconds: float = 0.1, max_cost: int = 12) -> int:
    """Smallest cost whose single evaluation meets the wall-time target."""
    for cost in range(max_cost + 1):
        params = KdfParams(cost=cost)
        t0 = time.perf_counter()
        kdf(b"calibration probe", params)
        if time.perf_counter() - t0 >= target_seconds:
            return cost
    return max_cost
