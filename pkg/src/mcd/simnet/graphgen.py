"""Seeded random social graphs: directed edges over phone-like identities."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..identity import Identity


@dataclass
class SocialGraph:
    identities: list[Identity]
    members: list[Identity]
    out_edges: dict[Identity, set[Identity]]
    hidden_marks: dict[Identity, frozenset[Identity]] = field(default_factory=dict)

    def contacts(self, ident: Identity) -> set[Identity]:
        return self.out_edges.get(ident, set())

    def hidden(self, ident: Identity) -> frozenset[Identity]:
        return self.hidden_marks.get(ident, frozenset())

    def visible(self, ident: Identity) -> set[Identity]:
        return self.contacts(ident) - self.hidden(ident)

    @property
    def edges(self) -> set[tuple[Identity, Identity]]:
        return {(a, b) for a, outs in self.out_edges.items() for b in outs}

    def is_mutual(self, a: Identity, b: Identity) -> bool:
        return b in self.contacts(a) and a in self.contacts(b)

    def mutual_member_pairs(self) -> set[tuple[Identity, Identity]]:
        members = set(self.members)
        pairs = set()
        for a in self.members:
            for b in self.contacts(a):
                if b in members and a.value < b.value and self.is_mutual(a, b):
                    pairs.add((a, b))
        return pairs

    def validate(self) -> None:
        ids = set(self.identities)
        assert set(self.members) <= ids
        for a, outs in self.out_edges.items():
            assert a not in outs, "self-edges are not allowed"
            assert outs <= ids
        for m, hid in self.hidden_marks.items():
            assert hid <= self.contacts(m), "hidden marks must be out-neighbors"


def gen_graph(n_identities: int, n_members: int, *, edge_prob: float | None = None,
              degree_target: float | None = None, mutual_bias: float = 0.0,
              seed: int = 0) -> SocialGraph:
    """Deterministic random digraph.

    Exactly one of edge_prob / degree_target selects the per-direction
    edge probability; mutual_bias shifts probability mass toward edges
    whose reverse also exists while keeping the marginal fixed.
    """
    if n_members > n_identities:
        raise ValueError("n_members cannot exceed n_identities")
    if (edge_prob is None) == (degree_target is None):
        raise ValueError("give exactly one of edge_prob or degree_target")
    if edge_prob is None:
        edge_prob = min(1.0, degree_target / max(1, n_identities - 1))
    if not 0.0 <= edge_prob <= 1.0 or not 0.0 <= mutual_bias <= 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    if edge_prob * (2.0 - mutual_bias) > 1.0:
        raise ValueError("edge_prob too high for this mutual_bias")

    rng = random.Random(f"graph:{seed}:{n_identities}:{n_members}")
    identities = [Identity(f"+10{i:08d}") for i in range(n_identities)]
    members = sorted(rng.sample(identities, n_members))

    p_both = edge_prob * mutual_bias
    p_one = edge_prob * (1.0 - mutual_bias)
    out_edges: dict[Identity, set[Identity]] = {i: set() for i in identities}
    for i in range(n_identities):
        a = identities[i]
        for j in range(i + 1, n_identities):
            r = rng.random()
            if r < p_both:
                b = identities[j]
                out_edges[a].add(b)
                out_edges[b].add(a)
            elif r < p_both + p_one:
                out_edges[a].add(identities[j])
            elif r < p_both + 2 * p_one:
                out_edges[identities[j]].add(a)

    return SocialGraph(identities=identities, members=members, out_edges=out_edges)


def mark_hidden(graph: SocialGraph, rng: random.Random, hider_count: int) -> None:
    """Mark random contact subsets hidden for members that have a mutual
    member partner, so hiding is actually observable."""
    members = set(graph.members)
    eligible = [
        m for m in graph.members
        if any(c in members and graph.is_mutual(m, c) for c in graph.contacts(m))
    ]
    hiders = eligible[:hider_count] if len(eligible) <= hider_count else sorted(
        rng.sample(eligible, hider_count)
    )
    for h in hiders:
        contacts = sorted(graph.contacts(h))
        mutual_partners = [c for c in contacts if c in members and graph.is_mutual(h, c)]
        chosen = {rng.choice(mutual_partners)}
        chosen.update(c for c in contacts if rng.random() < 0.3)
        graph.hidden_marks[h] = frozenset(chosen)
