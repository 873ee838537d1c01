"""Key server: phantom keys, enrollment, DH tokens."""

import random

import pytest

from mcd.authority import EnrollmentSecrets, UnauthorizedError
from mcd.identity import Identity
from mcd.keyserver import DhKeyPair, KeyServer, dh_keygen, dh_token
from mcd.suites import SuiteError, TransparentSuite


@pytest.fixture()
def ks(tsuite):
    return KeyServer(tsuite, EnrollmentSecrets(b"e" * 32), b"p" * 32)


class TestKeyServer:
    def test_phantom_keys_are_stable(self, ks):
        ghost = Identity("ghost")
        first = ks.get_key(ghost)
        for _ in range(100):
            assert ks.get_key(ghost) == first

    def test_phantom_then_enroll_then_enrolled(self, ks, tsuite):
        alice = Identity("alice")
        phantom = ks.get_key(alice)
        pk = tsuite.scalar_mul(tsuite.gen1, 1234).enc
        ks.enroll(alice, pk, ks._enrollment.proof_for(alice))
        assert ks.get_key(alice) == pk != phantom

    def test_enroll_requires_proof(self, ks, tsuite):
        with pytest.raises(UnauthorizedError):
            ks.enroll(Identity("alice"), tsuite.gen1.enc, b"wrong")

    def test_enroll_validates_key(self, ks):
        alice = Identity("alice")
        with pytest.raises(SuiteError):
            ks.enroll(alice, b"\xff" * 9, ks._enrollment.proof_for(alice))

    def test_distinct_phantoms(self, ks):
        keys = {ks.get_key(Identity(f"+49{i:05d}")) for i in range(100)}
        assert len(keys) == 100

    def test_enrolled_and_phantom_same_shape(self, ks, tsuite):
        alice, ghost = Identity("alice"), Identity("ghost")
        pk = tsuite.scalar_mul(tsuite.gen1, 77).enc
        ks.enroll(alice, pk, ks._enrollment.proof_for(alice))
        assert len(ks.get_key(alice)) == len(ks.get_key(ghost))

    def test_fetch_log_has_no_requester(self, ks):
        ks.get_key(Identity("alice"))
        ks.get_key(Identity("alice"))
        ks.get_key(Identity("bob"))
        assert ks.fetch_counts == {"alice": 2, "bob": 1}
        # the log is (identity, count) only; nothing about who asked
        assert all(isinstance(v, int) for v in ks.fetch_counts.values())

    def test_phantom_scalar_matches_served_key(self, ks, tsuite):
        ghost = Identity("ghost")
        scalar = ks.phantom_scalar(ghost)
        assert tsuite.scalar_mul(tsuite.gen1, scalar).enc == ks.get_key(ghost)


class TestDhTokens:
    def test_small_group_exponents(self):
        suite = TransparentSuite(101)
        a = DhKeyPair(sk=2, pk=suite.scalar_mul(suite.gen1, 2))
        b = DhKeyPair(sk=5, pk=suite.scalar_mul(suite.gen1, 5))
        tok = dh_token(a, b.pk, suite)
        assert suite.dlog(tok) == 10
        assert tok == dh_token(b, a.pk, suite)

    def test_symmetry_over_universe(self, tsuite, ids30):
        rng = random.Random(3)
        pairs = {i: dh_keygen(tsuite, rng) for i in ids30}
        for a in ids30:
            for b in ids30:
                if a >= b:
                    continue
                assert dh_token(pairs[a], pairs[b].pk, tsuite) == dh_token(
                    pairs[b], pairs[a].pk, tsuite
                )

    def test_identity_element_rejected(self, tsuite):
        kp = dh_keygen(tsuite, random.Random(1))
        zero = tsuite.scalar_mul(tsuite.gen1, 0)
        with pytest.raises(SuiteError):
            dh_token(kp, zero, tsuite)

    def test_wrong_slot_rejected(self, tsuite):
        kp = dh_keygen(tsuite, random.Random(1))
        with pytest.raises(SuiteError):
            dh_token(kp, tsuite.gen2, tsuite)

    def test_keygen_never_degenerate(self, tsuite):
        rng = random.Random(9)
        for _ in range(50):
            kp = dh_keygen(tsuite, rng)
            assert 1 <= kp.sk < tsuite.order
            assert tsuite.dlog(kp.pk) == kp.sk
