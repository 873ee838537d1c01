"""Adversarial actors: a tampering matching server, a certificate-less
guesser, and the colluding key-server forgery."""

from __future__ import annotations

import random

from .. import wire
from ..hashing import ordered_h2, random_token
from ..identity import Identity


class MaliciousMatchingWireService:
    """Wraps an honest matching wire service and tampers with queries.

    Capabilities: drop responses that would have revealed a match
    (modeling the withheld-information budget), inject fully fabricated
    tuples into responses, and graft the queried first component onto
    random seconds so fakes share the match key.
    """

    name = "matching"

    def __init__(self, inner, rng: random.Random, inject_budget: int = 0,
                 graft_budget: int = 0, drop_budget: int = 0,
                 per_response: int = 25, n_bits: int = 256):
        self.inner = inner
        self.rng = rng
        self.inject_budget = inject_budget
        self.graft_budget = graft_budget
        self.drop_budget = drop_budget
        self.per_response = per_response
        self.n_bits = n_bits
        self.injected = 0
        self.grafted = 0
        self.dropped_match_responses = 0

    def handle_line(self, line: bytes) -> bytes:
        raw = self.inner.handle_line(line)
        try:
            req = wire.decode(line)
            resp = wire.decode(raw)
        except wire.WireError:
            return raw
        if req.get("op") != "query" or "matches" not in resp:
            return raw

        matches = resp["matches"]
        if matches and self.dropped_match_responses < self.drop_budget:
            self.dropped_match_responses += 1
            return wire.encode({"matches": []})

        while self.injected < self.inject_budget and self._room(matches):
            matches.append([random_token(self.rng, self.n_bits),
                            random_token(self.rng, self.n_bits)])
            self.injected += 1
        while self.grafted < self.graft_budget and self._room(matches):
            matches.append([req["t1"], random_token(self.rng, self.n_bits)])
            self.grafted += 1
        return wire.encode({"matches": matches})

    def _room(self, matches) -> bool:
        return len(matches) < self.per_response

    def stuff_store(self, count: int) -> None:
        """Fabricated junk straight into S (the server owns its store)."""
        store = self.inner.service.store
        for _ in range(count):
            store.add(random_token(self.rng, self.n_bits),
                      random_token(self.rng, self.n_bits))


def run_guessing_attacker(identities: list[Identity], suite, transport,
                          rng: random.Random, attempts: int,
                          n_bits: int = 256, submit: bool = False) -> set[Identity]:
    """A member-less adversary who knows every identifier but holds no
    certificate.  It guesses tokens and checks responses the way an
    honest member would; without the master-scalar tokens every guess
    is noise."""
    discovered: set[Identity] = set()
    for _ in range(attempts):
        a, b = rng.sample(identities, 2)
        q1a = suite.hash_to_point(a.encode(), 1)
        q1b = suite.hash_to_point(b.encode(), 1)
        guess_t = suite.pair(
            suite.scalar_mul(suite.gen1, suite.random_scalar(rng)),
            suite.scalar_mul(suite.gen2, suite.random_scalar(rng)),
        )
        first = ordered_h2(guess_t, q1a, q1b, n_bits)
        second = ordered_h2(guess_t, q1b, q1b, n_bits)
        expected = ordered_h2(guess_t, q1a, q1a, n_bits)
        if submit:
            transport.request({"op": "submit", "t1": first, "t2": second})
        else:
            resp = transport.request({"op": "query", "t1": first, "t2": second})
            if any(sec == expected for _, sec in resp.get("matches", [])):
                discovered.add(b)
    return discovered


def forge_colluding_tuple(key_server, matching_store, victim: Identity,
                          target: Identity, n_bits: int = 256) -> str:
    """Key server + matching server collusion against an unenrolled target.

    The key server knows the phantom secret key it invented for the
    target, fetches the victim's real public key like anyone can, and
    computes the very token the victim will compute.  The matching
    server plants the resulting tuple.  Returns the forged second
    component (what the victim will accept as proof).
    """
    suite = key_server.suite
    sk_target = key_server.phantom_scalar(target)
    pk_victim = suite.decode_point(key_server.get_key(victim), 1)
    token = suite.scalar_mul(pk_victim, sk_target)
    q1v = suite.hash_to_point(victim.encode(), 1)
    q1t = suite.hash_to_point(target.encode(), 1)
    first = ordered_h2(token, q1v, q1t, n_bits)
    forged_second = ordered_h2(token, q1v, q1v, n_bits)
    matching_store.add(first, forged_second)
    return forged_second
