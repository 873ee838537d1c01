"""Key-server discovery variant: DH tokens over served public keys.

Members enroll Diffie-Hellman public keys with an authenticated key
server and fetch contacts' keys anonymously.  Lookups for unenrolled
identities return deterministic phantom keys so a fetch reveals nothing
about enrollment.  Tokens are plain DH shared points feeding the same
augmented-tuple flow as the certificate protocol.
"""

from __future__ import annotations

import hashlib
import hmac
import random
from dataclasses import dataclass

from .authority import EnrollmentSecrets, UnauthorizedError
from .hashing import ordered_h2, random_token
from .identity import Identity
from .member import ContactList, DiscoveryOutput, ProtocolError, TuplePair
from .suites import SourcePoint, SuiteError


@dataclass(frozen=True)
class DhKeyPair:
    sk: int
    pk: SourcePoint


def dh_keygen(suite, rng: random.Random) -> DhKeyPair:
    sk = suite.random_scalar(rng)
    return DhKeyPair(sk=sk, pk=suite.scalar_mul(suite.gen1, sk))


def dh_token(own: DhKeyPair, other_pk: SourcePoint, suite) -> SourcePoint:
    """other_pk^sk: the symmetric shared group element for the pair."""
    if other_pk.suite_id != suite.suite_id or other_pk.slot != 1:
        raise SuiteError("peer key must be a slot-1 element of the active suite")
    if _is_identity_element(other_pk, suite):
        raise SuiteError("peer key must not be the identity element")
    return suite.scalar_mul(other_pk, own.sk)


def _is_identity_element(pk: SourcePoint, suite) -> bool:
    return pk == suite.scalar_mul(suite.gen1, 0)


class KeyServer:
    """Serves enrolled keys, or stable phantoms for everyone else.

    The request log records only which identities were fetched and how
    often; there is no requester notion anywhere in the interface.
    """

    def __init__(self, suite, enrollment: EnrollmentSecrets, phantom_secret: bytes):
        self.suite = suite
        self._enrollment = enrollment
        self._phantom_secret = phantom_secret
        self._enrolled: dict[str, bytes] = {}
        self.fetch_counts: dict[str, int] = {}

    def enroll(self, identity: Identity, pk_enc: bytes, proof: bytes) -> None:
        if not self._enrollment.verify(identity, proof):
            raise UnauthorizedError(f"bad enrollment proof for {identity}")
        # decoding validates the key is a real group element
        self.suite.decode_point(pk_enc, 1)
        self._enrolled[identity.value] = bytes(pk_enc)

    def get_key(self, identity: Identity) -> bytes:
        self.fetch_counts[identity.value] = self.fetch_counts.get(identity.value, 0) + 1
        enc = self._enrolled.get(identity.value)
        if enc is None:
            enc = self._phantom_key(identity)
        return enc

    def _phantom_key(self, identity: Identity) -> bytes:
        digest = hmac.new(self._phantom_secret, identity.encode(), hashlib.sha256).digest()
        scalar = 1 + int.from_bytes(digest, "big") % (self.suite.order - 1)
        return self.suite.scalar_mul(self.suite.gen1, scalar).enc

    def is_enrolled(self, identity: Identity) -> bool:
        return identity.value in self._enrolled

    def phantom_scalar(self, identity: Identity) -> int:
        """Collusion helper (adversarial scenarios only): the discrete
        log of the phantom key this server would serve."""
        digest = hmac.new(self._phantom_secret, identity.encode(), hashlib.sha256).digest()
        return 1 + int.from_bytes(digest, "big") % (self.suite.order - 1)


class KsMemberState:
    """Member state for the key-server variant."""

    def __init__(self, identity: Identity, keypair: DhKeyPair, suite,
                 contacts: ContactList, n_bits: int = 256,
                 rng: random.Random | None = None):
        if identity in contacts:
            raise ValueError("own identity may not appear in the contact list")
        self.identity = identity
        self.keypair = keypair
        self.suite = suite
        self.contacts = contacts
        self.n_bits = n_bits
        self.rng = rng if rng is not None else random.SystemRandom()
        self.own_q1 = suite.hash_to_point(identity.encode(), 1)
        self.token_cache: dict[Identity, tuple[SourcePoint, SourcePoint]] = {}
        self.discovered: set[Identity] = set()
        self._hidden_seconds: dict[Identity, str] = {}


def _checked(resp: dict) -> dict:
    if "err" in resp:
        raise ProtocolError(resp["err"])
    return resp


def ks_enroll_self(state: KsMemberState, key_transport, proof: bytes) -> None:
    _checked(key_transport.request({
        "op": "enroll",
        "id": state.identity.value,
        "key": state.keypair.pk.enc.hex(),
        "proof": proof.hex(),
    }))


def _token_and_point(state: KsMemberState, contact: Identity, key_transport):
    ent = state.token_cache.get(contact)
    if ent is None:
        resp = _checked(key_transport.request({"op": "getkey", "id": contact.value}))
        pk = state.suite.decode_point(bytes.fromhex(resp["key"]), 1)
        token = dh_token(state.keypair, pk, state.suite)
        q1c = state.suite.hash_to_point(contact.encode(), 1)
        ent = (token, q1c)
        state.token_cache[contact] = ent
    return ent


def ks_make_submission(state: KsMemberState, contact: Identity, key_transport) -> TuplePair:
    token, q1c = _token_and_point(state, contact, key_transport)
    first = ordered_h2(token, state.own_q1, q1c, state.n_bits)
    if contact in state.contacts.hidden:
        second = state._hidden_seconds.get(contact)
        if second is None:
            second = random_token(state.rng, state.n_bits)
            state._hidden_seconds[contact] = second
    else:
        second = ordered_h2(token, q1c, q1c, state.n_bits)
    return TuplePair(first, second)


def ks_expected_second(state: KsMemberState, contact: Identity, key_transport) -> str:
    token, _ = _token_and_point(state, contact, key_transport)
    return ordered_h2(token, state.own_q1, state.own_q1, state.n_bits)


def ks_run_static(state: KsMemberState, key_transport, match_transport,
                  advance_phase=None) -> DiscoveryOutput:
    """Same two-phase flow as the certificate protocol, DH token source."""
    for contact in sorted(state.contacts.all()):
        pair = ks_make_submission(state, contact, key_transport)
        _checked(match_transport.request({"op": "submit", **pair.as_wire()}))
    if advance_phase is not None:
        advance_phase()
    out = DiscoveryOutput(mode="static")
    for contact in sorted(state.contacts.all()):
        token, q1c = _token_and_point(state, contact, key_transport)
        pair = TuplePair(
            ordered_h2(token, state.own_q1, q1c, state.n_bits),
            ordered_h2(token, q1c, q1c, state.n_bits),
        )
        expected = ks_expected_second(state, contact, key_transport)
        resp = _checked(match_transport.request({"op": "query", **pair.as_wire()}))
        if any(b == expected for _, b in resp.get("matches", [])):
            out.discovered.add(contact)
    state.discovered |= out.discovered
    return out


def ks_run_dynamic_step(state: KsMemberState, contact: Identity,
                        key_transport, match_transport) -> bool:
    pair = ks_make_submission(state, contact, key_transport)
    expected = ks_expected_second(state, contact, key_transport)
    resp = _checked(match_transport.request({"op": "query", **pair.as_wire()}))
    found = any(b == expected for _, b in resp.get("matches", []))
    if found:
        state.discovered.add(contact)
    return found
