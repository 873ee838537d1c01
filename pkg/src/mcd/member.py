"""Member-side protocol logic: tokens, tuple construction, discovery flows.

A member computes one shared secret token per contact, derives the
augmented token tuple from it, and talks to the matching server over a
sender-anonymous transport (one fresh connection per message).  Hidden
contacts get a random second tuple component, which lets the member
discover without being discoverable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .authority import Certificate, SystemParams
from .hashing import hash_to_points, ordered_h2, random_token
from .identity import Identity
from .suites import SourcePoint, TargetElement


class ContactError(Exception):
    pass


class SelfContactError(ContactError):
    pass


class UnknownContactError(ContactError):
    pass


class NotDiscoveredError(ContactError):
    pass


class ProtocolError(Exception):
    """Unexpected error response from a server."""

    def __init__(self, code: str):
        super().__init__(f"server error: {code}")
        self.code = code


class TransportError(Exception):
    """Connection-level failure; retryable."""


@dataclass(frozen=True)
class TuplePair:
    first: str
    second: str

    def as_wire(self) -> dict:
        return {"t1": self.first, "t2": self.second}


@dataclass
class DiscoveryOutput:
    discovered: set[Identity] = field(default_factory=set)
    mode: str = "static"
    incomplete: bool = False

    def to_json(self, identity: Identity) -> dict:
        return {
            "identity": identity.value,
            "discovered": sorted(i.value for i in self.discovered),
            "mode": self.mode,
            "incomplete": self.incomplete,
        }


class ContactList:
    """Visible and hidden contact sets; disjoint, duplicates collapse."""

    def __init__(self, visible=(), hidden=()):
        self.visible = frozenset(visible)
        self.hidden = frozenset(hidden)
        if self.visible & self.hidden:
            raise ContactError("visible and hidden sets must be disjoint")

    def all(self) -> frozenset[Identity]:
        return self.visible | self.hidden

    def __contains__(self, identity: Identity) -> bool:
        return identity in self.visible or identity in self.hidden

    def __len__(self) -> int:
        return len(self.visible) + len(self.hidden)

    def to_json(self, identity: Identity) -> dict:
        return {
            "identity": identity.value,
            "visible": sorted(i.value for i in self.visible),
            "hidden": sorted(i.value for i in self.hidden),
        }

    @classmethod
    def from_json(cls, obj: dict) -> tuple[Identity, "ContactList"]:
        owner = Identity(obj["identity"])
        contacts = cls(
            visible={Identity(v) for v in obj.get("visible", ())},
            hidden={Identity(v) for v in obj.get("hidden", ())},
        )
        return owner, contacts


class MemberState:
    """One member's protocol state; confined to a single logical actor."""

    def __init__(self, identity: Identity, certificate: Certificate,
                 params: SystemParams, contacts: ContactList,
                 rng: random.Random | None = None):
        if certificate.identity != identity:
            raise ContactError("certificate identity mismatch")
        if identity in contacts:
            raise SelfContactError("own identity may not appear in the contact list")
        self.identity = identity
        self.certificate = certificate
        self.params = params
        self.contacts = contacts
        self.rng = rng if rng is not None else random.SystemRandom()
        self.own_q1 = hash_to_points(identity, params.suite)[0]
        self.token_cache: dict[Identity, tuple[TargetElement, SourcePoint]] = {}
        self.discovered: set[Identity] = set()
        self._hidden_seconds: dict[Identity, str] = {}


def _token_and_point(state: MemberState, contact: Identity):
    ent = state.token_cache.get(contact)
    if ent is None:
        if contact == state.identity:
            raise SelfContactError("cannot compute a token for oneself")
        suite = state.params.suite
        q1c, q2c = hash_to_points(contact, suite)
        # Shared token: the pairing of the byte-order-smaller identity's
        # slot-1 hash with the larger one's slot-2 hash, raised to s via
        # whichever certificate half the caller holds.
        if state.identity.raw_bytes() < contact.raw_bytes():
            token = suite.pair(state.certificate.c1, q2c)
        else:
            token = suite.pair(q1c, state.certificate.c2)
        ent = (token, q1c)
        state.token_cache[contact] = ent
    return ent


def compute_token(state: MemberState, contact: Identity) -> TargetElement:
    """The pair-shared token; cached per contact."""
    return _token_and_point(state, contact)[0]


def _require_contact(state: MemberState, contact: Identity):
    if contact not in state.contacts:
        raise UnknownContactError(f"{contact} is not in the contact list")


def make_submission(state: MemberState, contact: Identity) -> TuplePair:
    """The tuple stored at the matching server for this contact.

    Hidden contacts keep a valid first component (so the member can
    still match) but submit uniformly random bits as the second, making
    the member undiscoverable through it.
    """
    _require_contact(state, contact)
    token, q1c = _token_and_point(state, contact)
    n = state.params.n_bits
    first = ordered_h2(token, state.own_q1, q1c, n)
    if contact in state.contacts.hidden:
        second = state._hidden_seconds.get(contact)
        if second is None:
            second = random_token(state.rng, n)
            state._hidden_seconds[contact] = second
    else:
        second = ordered_h2(token, q1c, q1c, n)
    return TuplePair(first, second)


def make_query(state: MemberState, contact: Identity) -> tuple[TuplePair, str]:
    """Query tuple (always the visible form) and the expected response
    second component that only a genuine mutual contact can produce."""
    _require_contact(state, contact)
    token, q1c = _token_and_point(state, contact)
    n = state.params.n_bits
    pair = TuplePair(
        ordered_h2(token, state.own_q1, q1c, n),
        ordered_h2(token, q1c, q1c, n),
    )
    expected = ordered_h2(token, state.own_q1, state.own_q1, n)
    return pair, expected


def process_query_response(expected_second: str, returned: list[TuplePair]) -> bool:
    return any(t.second == expected_second for t in returned)


def make_delete(state: MemberState, contact: Identity) -> TuplePair:
    """The exact tuple previously stored for this contact."""
    return make_submission(state, contact)


def derive_directory_access_token(state: MemberState, contact: Identity) -> str:
    """The access token gating the partner's directory record.

    This is the value the matching server returned on discovery (the
    partner submitted it keyed to this member's own points).
    """
    if contact not in state.discovered:
        raise NotDiscoveredError(f"{contact} has not been discovered")
    token, _ = _token_and_point(state, contact)
    return ordered_h2(token, state.own_q1, state.own_q1, state.params.n_bits)


# --- transport-facing flows -------------------------------------------------

def _checked(resp: dict) -> dict:
    if "err" in resp:
        raise ProtocolError(resp["err"])
    return resp


def _parse_matches(resp: dict) -> list[TuplePair]:
    return [TuplePair(a, b) for a, b in _checked(resp).get("matches", [])]


def submit_all(state: MemberState, transport) -> int:
    """Submission phase: one message per contact, fresh connection each."""
    count = 0
    for contact in sorted(state.contacts.all()):
        pair = make_submission(state, contact)
        _checked(transport.request({"op": "submit", **pair.as_wire()}))
        count += 1
    return count


def query_all(state: MemberState, transport) -> DiscoveryOutput:
    """Query phase: collect the discovery output."""
    out = DiscoveryOutput(mode="static")
    for contact in sorted(state.contacts.all()):
        pair, expected = make_query(state, contact)
        resp = transport.request({"op": "query", **pair.as_wire()})
        if process_query_response(expected, _parse_matches(resp)):
            out.discovered.add(contact)
    state.discovered |= out.discovered
    return out


def run_static(state: MemberState, transport, advance_phase=None) -> DiscoveryOutput:
    """Full static run: submit everything, then query everything.

    `advance_phase` is called between the phases (the deployment
    coordinator flips the server phase once all members have submitted).
    Transport failures yield a partial output flagged incomplete.
    """
    try:
        submit_all(state, transport)
        if advance_phase is not None:
            advance_phase()
        return query_all(state, transport)
    except TransportError:
        out = DiscoveryOutput(discovered=set(state.discovered), mode="static",
                              incomplete=True)
        return out


def run_dynamic_step(state: MemberState, contact: Identity, transport) -> bool:
    """One asynchronous query step; the server stores the tuple and
    returns matches.  Returns the discovery verdict for this step."""
    _require_contact(state, contact)
    pair = make_submission(state, contact)
    token, _ = _token_and_point(state, contact)
    expected = ordered_h2(token, state.own_q1, state.own_q1, state.params.n_bits)
    resp = transport.request({"op": "query", **pair.as_wire()})
    found = process_query_response(expected, _parse_matches(resp))
    if found:
        state.discovered.add(contact)
    return found


def send_delete(state: MemberState, contact: Identity, transport) -> None:
    pair = make_delete(state, contact)
    _checked(transport.request({"op": "delete", **pair.as_wire()}))
    state.discovered.discard(contact)
