"""Identity authority: system setup, certificate issuance, master erasure.

The authority generates the deployment parameters and the master scalar,
issues one certificate per authenticated identity, and then erases the
master scalar.  Identity proofing is simulated with per-identity
enrollment secrets derived from a key generated at setup and handed to
members out of band.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import secrets
import threading
from dataclasses import dataclass, field

from .hashing import DEFAULT_TOKEN_BITS, hash_to_points
from .identity import Identity
from .suites import SourcePoint, get_suite

PROTOCOL_VERSION = "mcd-v1"
SEED_BYTES = 32


class SetupError(Exception):
    pass


class IssuanceClosedError(Exception):
    """The master scalar has been erased; no further certificates."""


class UnauthorizedError(Exception):
    pass


@dataclass(frozen=True)
class SystemParams:
    suite: object
    p_pub1: SourcePoint
    p_pub2: SourcePoint
    n_bits: int = DEFAULT_TOKEN_BITS
    version: str = PROTOCOL_VERSION


@dataclass(frozen=True)
class Certificate:
    identity: Identity
    c1: SourcePoint
    c2: SourcePoint


class EnrollmentSecrets:
    """Per-identity enrollment proofs, distributed out of band.

    The authority (and the other enrolled services) hold the key and
    verify; each member only ever sees its own proof.
    """

    def __init__(self, key: bytes):
        self._key = key

    def proof_for(self, identity: Identity) -> bytes:
        return hmac.new(self._key, identity.encode(), hashlib.sha256).digest()

    def verify(self, identity: Identity, proof: bytes) -> bool:
        return hmac.compare_digest(self.proof_for(identity), proof)

    def to_json(self) -> dict:
        return {"key": self._key.hex()}

    @classmethod
    def from_json(cls, obj: dict) -> "EnrollmentSecrets":
        return cls(bytes.fromhex(obj["key"]))


class MasterSecret:
    """The setup scalar s, zeroized in place on erasure."""

    def __init__(self, s: int, enrollment: EnrollmentSecrets, params: SystemParams):
        self.s_bytes = bytearray(int(s).to_bytes(SEED_BYTES, "big"))
        self.state = "live"
        self.enrollment = enrollment
        self.params = params
        self._lock = threading.Lock()

    @property
    def s(self) -> int:
        if self.state != "live":
            raise IssuanceClosedError("master scalar erased")
        return int.from_bytes(self.s_bytes, "big")


def setup(security_profile: str, suite=None, seed: bytes | None = None,
          n_bits: int = DEFAULT_TOKEN_BITS) -> tuple[SystemParams, MasterSecret]:
    """Generate system parameters and the master secret.

    Seeding is a test-profile convenience only; the production profile
    refuses it so deployments cannot accidentally ship derivable keys.
    """
    if security_profile not in ("test", "production"):
        raise SetupError(f"unknown profile {security_profile!r}")
    if suite is None:
        suite = get_suite("production_pairing" if security_profile == "production"
                          else "transparent_test_pairing")
    if seed is not None:
        if security_profile == "production":
            raise SetupError("seeding is refused in the production profile")
        if len(seed) != SEED_BYTES:
            raise SetupError(f"seed must be {SEED_BYTES} bytes")
        s = 1 + int.from_bytes(
            hashlib.sha256(b"MCD-setup-master" + seed).digest(), "big"
        ) % (suite.order - 1)
        enroll_key = hashlib.sha256(b"MCD-setup-enroll" + seed).digest()
    else:
        s = 1 + secrets.randbelow(suite.order - 1)
        enroll_key = secrets.token_bytes(32)

    params = SystemParams(
        suite=suite,
        p_pub1=suite.scalar_mul(suite.gen1, s),
        p_pub2=suite.scalar_mul(suite.gen2, s),
        n_bits=n_bits,
    )
    return params, MasterSecret(s, EnrollmentSecrets(enroll_key), params)


def issue_certificate(ms: MasterSecret, identity: Identity, auth_proof: bytes) -> Certificate:
    """Issue s*Q1(id), s*Q2(id) after checking the enrollment proof."""
    with ms._lock:
        if ms.state != "live":
            raise IssuanceClosedError("issuance is closed after erasure")
        if not ms.enrollment.verify(identity, auth_proof):
            raise UnauthorizedError(f"bad enrollment proof for {identity}")
        suite = ms.params.suite
        q1, q2 = hash_to_points(identity, suite)
        s = ms.s
        return Certificate(
            identity=identity,
            c1=suite.scalar_mul(q1, s),
            c2=suite.scalar_mul(q2, s),
        )


def verify_certificate(params: SystemParams, cert: Certificate) -> bool:
    """Both pairing consistency equations must hold."""
    suite = params.suite
    q1, q2 = hash_to_points(cert.identity, suite)
    try:
        return (
            suite.pair(cert.c1, suite.gen2) == suite.pair(q1, params.p_pub2)
            and suite.pair(suite.gen1, cert.c2) == suite.pair(params.p_pub1, q2)
        )
    except Exception:
        return False


def erase_master(ms: MasterSecret) -> None:
    """Zeroize the master scalar; idempotent."""
    with ms._lock:
        for i in range(len(ms.s_bytes)):
            ms.s_bytes[i] = 0
        ms.state = "erased"


# --- file formats ---------------------------------------------------------

def params_to_json(params: SystemParams) -> dict:
    return {
        "suite_id": params.suite.suite_id,
        "q": hex(params.suite.order),
        "generators": {"p1": params.suite.gen1.hex(), "p2": params.suite.gen2.hex()},
        "p_pub1": params.p_pub1.hex(),
        "p_pub2": params.p_pub2.hex(),
        "n": params.n_bits,
        "version": params.version,
    }


def params_from_json(obj: dict) -> SystemParams:
    suite = get_suite(obj["suite_id"], int(obj["q"], 16))
    expect = {"p1": suite.gen1.hex(), "p2": suite.gen2.hex()}
    if obj["generators"] != expect:
        raise SetupError("generator mismatch in parameters file")
    return SystemParams(
        suite=suite,
        p_pub1=suite.decode_point(bytes.fromhex(obj["p_pub1"]), 1),
        p_pub2=suite.decode_point(bytes.fromhex(obj["p_pub2"]), 2),
        n_bits=int(obj["n"]),
        version=obj["version"],
    )


def certificate_to_json(cert: Certificate) -> dict:
    return {"identity": cert.identity.value, "c1": cert.c1.hex(), "c2": cert.c2.hex()}


def certificate_from_json(obj: dict, params: SystemParams) -> Certificate:
    suite = params.suite
    return Certificate(
        identity=Identity(obj["identity"]),
        c1=suite.decode_point(bytes.fromhex(obj["c1"]), 1),
        c2=suite.decode_point(bytes.fromhex(obj["c2"]), 2),
    )


def save_json(path, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
