"""KDF-token discovery variant, including its documented privacy weakness.

Tokens are direction-sensitive KDF digests over the concatenated
identifier pair: the submission for contact A is keyed (A, self), the
query for A is keyed (self, A).  Anyone who can guess an identifier
pair can probe the store, which is exactly the weakness
attack_contact_probe demonstrates.
"""

from __future__ import annotations

from .hashing import KdfParams, is_token, kdf
from .identity import Identity, concat_unambiguous
from .matching import MalformedError, ModeError, PhaseError, ServerStats
from .member import DiscoveryOutput, ProtocolError


def simple_token(a: Identity, b: Identity, params: KdfParams) -> str:
    """KDF(a || b), hex.  Order matters; a must differ from b."""
    if a == b:
        raise ValueError("token endpoints must differ")
    return kdf(concat_unambiguous(a.raw_bytes(), b.raw_bytes()), params).hex()


class SimpleService:
    """Single-token store with the same two-phase discipline."""

    def __init__(self, n_bits: int = 256):
        self.phase = "submission"
        self.n_bits = n_bits
        self.store: set[str] = set()

    def _validate(self, t):
        if not is_token(t, self.n_bits):
            raise MalformedError("token must be fixed-length lowercase hex")

    def submit(self, t: str) -> None:
        self._validate(t)
        if self.phase != "submission":
            raise PhaseError("submission phase is over")
        self.store.add(t)

    def query(self, t: str) -> bool:
        self._validate(t)
        if self.phase != "query":
            raise PhaseError("server is still in the submission phase")
        return t in self.store

    def advance_phase(self) -> None:
        if self.phase != "submission":
            raise PhaseError("already in the query phase")
        self.phase = "query"

    def stats(self) -> ServerStats:
        return ServerStats(s_c=len(self.store), s_mc=0)


def _checked(resp: dict) -> dict:
    if "err" in resp:
        raise ProtocolError(resp["err"])
    return resp


def simple_submit_all(member: Identity, contacts, params: KdfParams, transport) -> int:
    count = 0
    for contact in sorted(contacts):
        tok = simple_token(contact, member, params)
        _checked(transport.request({"op": "simple_submit", "t": tok}))
        count += 1
    return count


def simple_query_all(member: Identity, contacts, params: KdfParams, transport) -> DiscoveryOutput:
    out = DiscoveryOutput(mode="static")
    for contact in sorted(contacts):
        tok = simple_token(member, contact, params)
        resp = _checked(transport.request({"op": "simple_query", "t": tok}))
        if resp.get("present"):
            out.discovered.add(contact)
    return out


def simple_run(member: Identity, contacts, params: KdfParams, transport,
               advance_phase=None) -> DiscoveryOutput:
    """Static run of the KDF variant over an anonymous transport."""
    simple_submit_all(member, contacts, params, transport)
    if advance_phase is not None:
        advance_phase()
    return simple_query_all(member, contacts, params, transport)


def attack_contact_probe(adversary_knowledge: tuple[Identity, Identity],
                         transport, params: KdfParams) -> bool:
    """Probe whether a is on b's contact list; anyone can run this.

    Succeeding is the point: this variant does not keep contact lists
    private against parties that can guess both identifiers.
    """
    a, b = adversary_knowledge
    tok = simple_token(a, b, params)
    resp = _checked(transport.request({"op": "simple_query", "t": tok}))
    return bool(resp.get("present"))
