"""Access-token-gated public key directory.

A record owner registers one gate value per contact; a fetch releases
the key only when the presented token matches a gate.  The denial for
"no such record" and "wrong token" is the same object, so fetches leak
nothing about membership.
"""

from __future__ import annotations

from .authority import EnrollmentSecrets, UnauthorizedError
from .identity import Identity


class KeyDirectory:
    def __init__(self, enrollment: EnrollmentSecrets):
        self._enrollment = enrollment
        self._records: dict[str, tuple[bytes, frozenset[str]]] = {}

    def put_key(self, owner: Identity, pubkey: bytes, gates, proof: bytes) -> None:
        """Store or replace the owner's record; gates replace wholesale,
        so a re-put can both extend and revoke access."""
        if not self._enrollment.verify(owner, proof):
            raise UnauthorizedError(f"bad enrollment proof for {owner}")
        self._records[owner.value] = (bytes(pubkey), frozenset(gates))

    def get_key(self, target: Identity, access_token: str) -> bytes | None:
        """The key iff the token opens a gate; None is the uniform denial."""
        record = self._records.get(target.value)
        if record is None:
            return None
        pubkey, gates = record
        if access_token not in gates:
            return None
        return pubkey

    def gate_count(self, owner: Identity) -> int:
        record = self._records.get(owner.value)
        return len(record[1]) if record else 0
