"""Member-side token and tuple construction, checked exhaustively on the
transparent 30-identity universe."""

import random

import pytest

from mcd.authority import erase_master, issue_certificate, setup
from mcd.hashing import hash_to_points, is_token, ordered_h2
from mcd.identity import Identity
from mcd.member import (
    ContactError,
    ContactList,
    MemberState,
    NotDiscoveredError,
    SelfContactError,
    TuplePair,
    UnknownContactError,
    compute_token,
    derive_directory_access_token,
    make_delete,
    make_query,
    make_submission,
    process_query_response,
)

SEED = b"\x07" * 32


@pytest.fixture(scope="module")
def world(tsuite, ids30):
    """All 30 identities as members of a complete mutual graph."""
    params, ms = setup("test", suite=tsuite, seed=SEED)
    certs = {i: issue_certificate(ms, i, ms.enrollment.proof_for(i)) for i in ids30}
    s_value = ms.s
    erase_master(ms)
    members = {}
    for i in ids30:
        contacts = ContactList(visible=set(ids30) - {i})
        members[i] = MemberState(i, certs[i], params, contacts,
                                 rng=random.Random(f"member:{i}"))
    return params, members, s_value


class TestTokens:
    def test_symmetry_exhaustive(self, world, ids30):
        _, members, _ = world
        for a in ids30:
            for b in ids30:
                if a == b:
                    continue
                assert compute_token(members[a], b) == compute_token(members[b], a)

    def test_token_exponent_is_product(self, world, tsuite, ids30):
        _, members, s = world
        a, b = ids30[0], ids30[1]
        qa = tsuite.dlog(hash_to_points(a, tsuite)[0])
        qb = tsuite.dlog(hash_to_points(b, tsuite)[1])
        # byte order determines which slot hash enters the pairing
        lo, hi = sorted((a, b), key=lambda i: i.raw_bytes())
        exp = (
            s
            * tsuite.dlog(hash_to_points(lo, tsuite)[0])
            * tsuite.dlog(hash_to_points(hi, tsuite)[1])
        ) % tsuite.order
        assert tsuite.dlog(compute_token(members[a], b)) == exp

    def test_self_contact_rejected(self, world, ids30):
        _, members, _ = world
        with pytest.raises(SelfContactError):
            compute_token(members[ids30[0]], ids30[0])

    def test_token_cached(self, world, ids30):
        _, members, _ = world
        st = members[ids30[2]]
        t1 = compute_token(st, ids30[3])
        assert st.token_cache[ids30[3]][0] is t1
        assert compute_token(st, ids30[3]) is t1


class TestSubmissions:
    def test_mutual_first_components_equal_exhaustive(self, world, ids30):
        _, members, _ = world
        for a in ids30:
            for b in ids30:
                if a >= b:
                    continue
                sa = make_submission(members[a], b)
                sb = make_submission(members[b], a)
                assert sa.first == sb.first
                assert sa.second != sb.second

    def test_expected_second_matches_partner_submission(self, world, ids30):
        _, members, _ = world
        for a in ids30:
            for b in ids30:
                if a == b:
                    continue
                _, expected = make_query(members[a], b)
                assert make_submission(members[b], a).second == expected

    def test_per_member_components_all_distinct(self, world, ids30):
        _, members, _ = world
        for m in ids30:
            parts = []
            for c in sorted(members[m].contacts.all()):
                sub = make_submission(members[m], c)
                parts.extend([sub.first, sub.second])
            assert len(set(parts)) == len(parts)

    def test_unknown_contact_rejected(self, world, ids30):
        _, members, _ = world
        with pytest.raises(UnknownContactError):
            make_submission(members[ids30[0]], Identity("stranger"))

    def test_query_tuple_equals_submission_for_visible(self, world, ids30):
        _, members, _ = world
        pair, _ = make_query(members[ids30[0]], ids30[1])
        assert pair == make_submission(members[ids30[0]], ids30[1])
        assert make_delete(members[ids30[0]], ids30[1]) == pair

    def test_expected_second_differs_from_sent_second(self, world, ids30):
        _, members, _ = world
        for b in ids30[1:10]:
            pair, expected = make_query(members[ids30[0]], b)
            assert expected != pair.second

    def test_tokens_are_wire_shaped(self, world, ids30):
        _, members, _ = world
        sub = make_submission(members[ids30[0]], ids30[1])
        assert is_token(sub.first) and is_token(sub.second)


class TestHiddenContacts:
    @pytest.fixture()
    def hider(self, world, ids30):
        params, members, _ = world
        h = ids30[0]
        partner = ids30[1]
        contacts = ContactList(visible=set(ids30) - {h, partner}, hidden={partner})
        st = MemberState(h, members[h].certificate, params, contacts,
                         rng=random.Random("hider"))
        return st, partner, members[partner]

    def test_hidden_submission_shape(self, hider):
        st, partner, partner_state = hider
        visible_form, expected = make_query(st, partner)
        sub = make_submission(st, partner)
        assert sub.first == visible_form.first
        assert sub.second != visible_form.second
        assert is_token(sub.second)
        # stable across calls so delete can target the stored tuple
        assert make_submission(st, partner) == sub
        assert make_delete(st, partner) == sub

    def test_hider_can_still_verify_partner(self, hider):
        st, partner, partner_state = hider
        _, expected = make_query(st, partner)
        partner_sub = make_submission(partner_state, st.identity)
        assert process_query_response(expected, [partner_sub])

    def test_partner_cannot_verify_hider(self, hider):
        st, partner, partner_state = hider
        _, partner_expected = make_query(partner_state, st.identity)
        assert not process_query_response(partner_expected, [make_submission(st, partner)])


class TestQueryResponseProcessing:
    def test_empty_response(self):
        assert not process_query_response("ab" * 32, [])

    def test_partner_tuple_found(self, world, ids30):
        _, members, _ = world
        _, expected = make_query(members[ids30[0]], ids30[1])
        partner = make_submission(members[ids30[1]], ids30[0])
        noise = TuplePair("0" * 64, "1" * 64)
        assert process_query_response(expected, [noise, partner])

    def test_random_tuples_never_match(self, world, ids30):
        _, members, _ = world
        _, expected = make_query(members[ids30[0]], ids30[1])
        rng = random.Random(99)
        randoms = [
            TuplePair(
                rng.getrandbits(256).to_bytes(32, "big").hex(),
                rng.getrandbits(256).to_bytes(32, "big").hex(),
            )
            for _ in range(10_000)
        ]
        assert not process_query_response(expected, randoms)


class TestStateAndContacts:
    def test_contact_list_disjointness(self, ids30):
        with pytest.raises(ContactError):
            ContactList(visible={ids30[0]}, hidden={ids30[0]})

    def test_contact_list_round_trip(self, ids30):
        cl = ContactList(visible={ids30[1], ids30[2]}, hidden={ids30[3]})
        owner, restored = ContactList.from_json(cl.to_json(ids30[0]))
        assert owner == ids30[0]
        assert restored.visible == cl.visible and restored.hidden == cl.hidden

    def test_own_identity_excluded(self, world, ids30):
        params, members, _ = world
        me = ids30[0]
        with pytest.raises(SelfContactError):
            MemberState(me, members[me].certificate, params,
                        ContactList(visible={me}))

    def test_certificate_identity_must_match(self, world, ids30):
        params, members, _ = world
        with pytest.raises(ContactError):
            MemberState(ids30[0], members[ids30[1]].certificate, params,
                        ContactList())

    def test_directory_token_requires_discovery(self, world, ids30):
        params, members, _ = world
        st = members[ids30[5]]
        with pytest.raises(NotDiscoveredError):
            derive_directory_access_token(st, ids30[6])
        st.discovered.add(ids30[6])
        try:
            tok = derive_directory_access_token(st, ids30[6])
            _, expected = make_query(st, ids30[6])
            assert tok == expected
            # the partner's submission for us carries exactly this gate value
            assert make_submission(members[ids30[6]], ids30[5]).second == tok
        finally:
            st.discovered.discard(ids30[6])
