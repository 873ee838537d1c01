"""Ground-truth discovery outputs: what a trusted third party would say."""

from __future__ import annotations

from dataclasses import dataclass

from ..identity import Identity
from .graphgen import SocialGraph


@dataclass(frozen=True)
class OracleExpectation:
    out: dict[Identity, frozenset[Identity]]
    s_tuples: int        # tuples an honest static run leaves in the store
    s_c_pairs: int       # ordered member pairs (A, B) with A in contacts(B)
    s_mc: int            # matching ordered tuple pairs: 2 x mutual member pairs


def ideal_oracle(graph: SocialGraph) -> OracleExpectation:
    """Expected outputs per member plus the two server count outputs.

    A member M discovers X exactly when X is a member, each has the
    other as a contact, and X did not mark M hidden.  Hiding does not
    reduce the matching pair count: hiders still submit a matching
    first component.
    """
    members = set(graph.members)
    out: dict[Identity, frozenset[Identity]] = {}
    for m in graph.members:
        found = {
            x
            for x in graph.contacts(m)
            if x in members and m in graph.contacts(x) and m not in graph.hidden(x)
        }
        out[m] = frozenset(found)

    s_tuples = sum(len(graph.contacts(m)) for m in graph.members)
    s_c_pairs = sum(
        1 for b in graph.members for a in graph.contacts(b) if a in members
    )
    s_mc = 2 * len(graph.mutual_member_pairs())
    return OracleExpectation(out=out, s_tuples=s_tuples, s_c_pairs=s_c_pairs, s_mc=s_mc)
