"""Matching server semantics vs naive full-scan oracles."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcd.matching import (
    MalformedError,
    MatchingService,
    ModeError,
    PersistenceError,
    PhaseError,
    TupleStore,
    replay_log,
)


def _tok(rng, pool=16):
    """Small token pool so collisions on first components actually happen."""
    return f"{rng.randrange(pool):064x}"


def naive_matches(tuples, t1, t2):
    return sorted(p for p in tuples if p[0] == t1 and p[1] != t2)


def naive_stats(tuples):
    tuples = set(tuples)
    s_mc = sum(
        1
        for u in tuples
        for v in tuples
        if u != v and u[0] == v[0] and u[1] != v[1]
    )
    return len(tuples), s_mc


token_st = st.integers(0, 12).map(lambda v: f"{v:064x}")
pair_st = st.tuples(token_st, token_st)


class TestStore:
    def test_set_semantics(self):
        store = TupleStore()
        assert store.add("0" * 64, "1" * 64)
        assert not store.add("0" * 64, "1" * 64)
        assert len(store) == 1
        assert store.discard("0" * 64, "1" * 64)
        assert not store.discard("0" * 64, "1" * 64)
        assert len(store) == 0

    @given(st.lists(pair_st, max_size=60), pair_st)
    @settings(max_examples=200, deadline=None)
    def test_matches_equals_full_scan(self, pairs, probe):
        store = TupleStore()
        for a, b in pairs:
            store.add(a, b)
        assert store.matches(*probe) == naive_matches(set(pairs), *probe)

    @given(st.lists(st.tuples(st.booleans(), pair_st), max_size=80))
    @settings(max_examples=200, deadline=None)
    def test_stats_equals_recount(self, ops):
        store = TupleStore()
        live = set()
        for add, (a, b) in ops:
            if add:
                store.add(a, b)
                live.add((a, b))
            else:
                store.discard(a, b)
                live.discard((a, b))
        st_ = store.stats()
        assert (st_.s_c, st_.s_mc) == naive_stats(live)

    def test_large_random_store_oracle(self):
        rng = random.Random(5)
        store = TupleStore()
        live = set()
        for _ in range(10_000):
            pair = (_tok(rng, 64), _tok(rng, 4096))
            store.add(*pair)
            live.add(pair)
        stats = store.stats()
        assert (stats.s_c, stats.s_mc) == naive_stats(live)
        for _ in range(50):
            probe = (_tok(rng, 64), _tok(rng, 4096))
            assert store.matches(*probe) == naive_matches(live, *probe)

    def test_three_tuples_sharing_first(self):
        store = TupleStore()
        first = "a" * 64
        store.add(first, "1" * 64)
        store.add(first, "2" * 64)
        store.add(first, "3" * 64)
        got = store.matches(first, "1" * 64)
        assert got == [(first, "2" * 64), (first, "3" * 64)]
        assert store.stats().s_mc == 6  # ordered pairs among three

    def test_stats_empty(self):
        assert TupleStore().stats() == TupleStore().stats()
        st_ = TupleStore().stats()
        assert (st_.s_c, st_.s_mc) == (0, 0)


class TestStaticMode:
    def test_submit_then_query_flow(self):
        svc = MatchingService("static")
        svc.submit("a" * 64, "1" * 64)
        svc.submit("a" * 64, "1" * 64)  # idempotent
        assert len(svc.store) == 1
        with pytest.raises(PhaseError):
            svc.query("a" * 64, "0" * 64)
        svc.advance_phase()
        assert svc.query("a" * 64, "0" * 64) == [("a" * 64, "1" * 64)]
        with pytest.raises(PhaseError):
            svc.submit("b" * 64, "2" * 64)

    def test_query_never_mutates(self):
        svc = MatchingService("static")
        svc.submit("a" * 64, "1" * 64)
        svc.advance_phase()
        before = set(svc.store.tuples())
        svc.query("c" * 64, "9" * 64)
        assert set(svc.store.tuples()) == before

    def test_advance_twice_fails(self):
        svc = MatchingService("static")
        svc.advance_phase()
        with pytest.raises(PhaseError):
            svc.advance_phase()

    def test_delete_needs_dynamic(self):
        svc = MatchingService("static")
        with pytest.raises(ModeError):
            svc.delete("a" * 64, "1" * 64)

    def test_malformed_tokens(self):
        svc = MatchingService("static")
        with pytest.raises(MalformedError):
            svc.submit("zz" * 32, "1" * 64)
        with pytest.raises(MalformedError):
            svc.submit("a" * 63, "1" * 64)
        with pytest.raises(MalformedError):
            svc.submit("A" * 64, "1" * 64)


class TestDynamicMode:
    def test_query_stores_then_answers(self):
        svc = MatchingService("dynamic")
        assert svc.query("a" * 64, "1" * 64) == []
        assert ("a" * 64, "1" * 64) in svc.store
        got = svc.query("a" * 64, "2" * 64)
        assert got == [("a" * 64, "1" * 64)]
        # re-query by the first party: own tuple excluded, partner returned
        got = svc.query("a" * 64, "1" * 64)
        assert got == [("a" * 64, "2" * 64)]

    def test_submit_and_advance_rejected(self):
        svc = MatchingService("dynamic")
        with pytest.raises(ModeError):
            svc.submit("a" * 64, "1" * 64)
        with pytest.raises(ModeError):
            svc.advance_phase()

    def test_delete_and_requery(self):
        svc = MatchingService("dynamic")
        svc.query("a" * 64, "1" * 64)
        svc.delete("a" * 64, "1" * 64)
        assert ("a" * 64, "1" * 64) not in svc.store
        svc.delete("a" * 64, "1" * 64)  # absent: no-op
        assert svc.query("a" * 64, "2" * 64) == []
        # owner re-queries: the tuple is stored again and discoverable
        svc.query("a" * 64, "1" * 64)
        assert svc.query("a" * 64, "2" * 64) == [("a" * 64, "1" * 64)]


class TestPersistence:
    def test_replay_matches_original(self, tmp_path):
        log = tmp_path / "store.log"
        svc = MatchingService("dynamic", log_path=str(log))
        rng = random.Random(7)
        live = set()
        for _ in range(300):
            pair = (_tok(rng, 32), _tok(rng, 256))
            if rng.random() < 0.8:
                svc.query(*pair)
                live.add(pair)
            else:
                svc.delete(*pair)
                live.discard(pair)
        svc.close()
        restored = replay_log(str(log), TupleStore())
        assert set(restored.tuples()) == set(svc.store.tuples()) == live
        assert restored.stats() == svc.store.stats()

    def test_submit_plus_delete_excluded(self, tmp_path):
        log = tmp_path / "store.log"
        svc = MatchingService("dynamic", log_path=str(log))
        svc.query("a" * 64, "1" * 64)
        svc.query("b" * 64, "2" * 64)
        svc.delete("a" * 64, "1" * 64)
        svc.close()
        restored = replay_log(str(log), TupleStore())
        assert set(restored.tuples()) == {("b" * 64, "2" * 64)}

    def test_corrupt_line_aborts_with_number(self, tmp_path):
        log = tmp_path / "store.log"
        svc = MatchingService("dynamic", log_path=str(log))
        svc.query("a" * 64, "1" * 64)
        svc.query("b" * 64, "2" * 64)
        svc.close()
        with open(log, "a", encoding="utf-8") as fh:
            fh.write('{"op":"add","t1":"truncat')
            fh.write("\n")
        with pytest.raises(PersistenceError) as exc:
            replay_log(str(log), TupleStore())
        assert exc.value.line_no == 3

    def test_restore_resumes_appending(self, tmp_path):
        log = tmp_path / "store.log"
        svc = MatchingService("dynamic", log_path=str(log))
        svc.query("a" * 64, "1" * 64)
        svc.close()
        svc2 = MatchingService("dynamic", log_path=str(log), restore=True)
        assert ("a" * 64, "1" * 64) in svc2.store
        svc2.query("b" * 64, "2" * 64)
        svc2.close()
        restored = replay_log(str(log), TupleStore())
        assert len(restored) == 2

    def test_bad_mode_rejected(self):
        with pytest.raises(ValueError):
            MatchingService("hybrid")
