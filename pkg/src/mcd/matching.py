"""Matching server core: the tuple store, phase/mode rules, and stats.

The server never sees anything but fixed-length token tuples.  Static
deployments run a submission phase followed by a query phase; dynamic
deployments run forever, folding every queried tuple into the store.
All mutations can be mirrored to an append-only log for crash recovery.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .hashing import is_token


class MatchingError(Exception):
    code = "error"


class MalformedError(MatchingError):
    code = "malformed"


class PhaseError(MatchingError):
    code = "phase"


class ModeError(MatchingError):
    code = "mode"


class PersistenceError(Exception):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"log line {line_no}: {reason}")
        self.line_no = line_no


@dataclass(frozen=True)
class ServerStats:
    s_c: int
    s_mc: int


class TupleStore:
    """Set of token tuples with a first-component index."""

    def __init__(self):
        self._tuples: set[tuple[str, str]] = set()
        self._index: dict[str, set[tuple[str, str]]] = {}

    def __len__(self):
        return len(self._tuples)

    def __contains__(self, pair):
        return tuple(pair) in self._tuples

    def tuples(self):
        return iter(self._tuples)

    def add(self, t1: str, t2: str) -> bool:
        pair = (t1, t2)
        if pair in self._tuples:
            return False
        self._tuples.add(pair)
        self._index.setdefault(t1, set()).add(pair)
        return True

    def discard(self, t1: str, t2: str) -> bool:
        pair = (t1, t2)
        if pair not in self._tuples:
            return False
        self._tuples.discard(pair)
        bucket = self._index[t1]
        bucket.discard(pair)
        if not bucket:
            del self._index[t1]
        return True

    def matches(self, t1: str, t2: str) -> list[tuple[str, str]]:
        """All stored tuples sharing the first component with a
        different second component, in deterministic order."""
        return sorted(p for p in self._index.get(t1, ()) if p[1] != t2)

    def stats(self) -> ServerStats:
        pairs = sum(len(b) * (len(b) - 1) for b in self._index.values())
        return ServerStats(s_c=len(self._tuples), s_mc=pairs)


def _validate_pair(t1, t2, n_bits: int) -> None:
    if not (is_token(t1, n_bits) and is_token(t2, n_bits)):
        raise MalformedError("token components must be fixed-length lowercase hex")


class MatchingService:
    """Mode-aware request handling over a TupleStore."""

    PHASES = ("submission", "query")

    def __init__(self, mode: str = "static", log_path=None, restore: bool = False,
                 n_bits: int = 256):
        if mode not in ("static", "dynamic"):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.phase = "submission" if mode == "static" else None
        self.n_bits = n_bits
        self.store = TupleStore()
        self._log_path = log_path
        self._log_fh = None
        if log_path is not None:
            if restore and os.path.exists(log_path):
                replay_log(log_path, self.store)
            self._log_fh = open(log_path, "a", encoding="utf-8")

    def close(self):
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None

    def _log(self, op: str, t1: str, t2: str):
        if self._log_fh is not None:
            self._log_fh.write(json.dumps({"op": op, "t1": t1, "t2": t2}) + "\n")
            self._log_fh.flush()

    def submit(self, t1: str, t2: str) -> None:
        _validate_pair(t1, t2, self.n_bits)
        if self.mode != "static":
            raise ModeError("submit is a static-mode operation")
        if self.phase != "submission":
            raise PhaseError("submission phase is over")
        if self.store.add(t1, t2):
            self._log("add", t1, t2)

    def query(self, t1: str, t2: str) -> list[tuple[str, str]]:
        _validate_pair(t1, t2, self.n_bits)
        if self.mode == "static":
            if self.phase != "query":
                raise PhaseError("server is still in the submission phase")
            return self.store.matches(t1, t2)
        # dynamic: store the tuple, then answer
        if self.store.add(t1, t2):
            self._log("add", t1, t2)
        return self.store.matches(t1, t2)

    def delete(self, t1: str, t2: str) -> None:
        _validate_pair(t1, t2, self.n_bits)
        if self.mode != "dynamic":
            raise ModeError("delete is a dynamic-mode operation")
        if self.store.discard(t1, t2):
            self._log("del", t1, t2)

    def advance_phase(self) -> None:
        if self.mode != "static":
            raise ModeError("phases exist only in static mode")
        if self.phase != "submission":
            raise PhaseError("already in the query phase")
        self.phase = "query"

    def stats(self) -> ServerStats:
        return self.store.stats()


def replay_log(log_path, store: TupleStore) -> TupleStore:
    """Rebuild a store from an append-only log; abort on any corrupt line."""
    with open(log_path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                raise PersistenceError(line_no, "blank line")
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise PersistenceError(line_no, f"bad json: {exc.msg}") from exc
            if not isinstance(rec, dict) or set(rec) != {"op", "t1", "t2"}:
                raise PersistenceError(line_no, "record must have op, t1, t2")
            if not (is_token(rec["t1"]) and is_token(rec["t2"])):
                raise PersistenceError(line_no, "bad token encoding")
            if rec["op"] == "add":
                store.add(rec["t1"], rec["t2"])
            elif rec["op"] == "del":
                store.discard(rec["t1"], rec["t2"])
            else:
                raise PersistenceError(line_no, f"unknown op {rec['op']!r}")
    return store
