"""Wire services and the one-request-per-connection TCP server.

A wire service turns one decoded request dict into one response dict;
the same handler backs in-process transports and the socket server, so
protocol semantics are identical either way.  Handlers receive nothing
but the request object: no peer address, no session, no ordering hints.
"""

from __future__ import annotations

import random
import socketserver
import threading
import time

from . import wire
from .authority import UnauthorizedError
from .directory import KeyDirectory
from .hashing import is_token, random_token
from .identity import Identity, IdentityError
from .keyserver import KeyServer
from .matching import MatchingError, MatchingService
from .simple import SimpleService


class TokenBucket:
    """Global requests-per-second limiter (burst = rate)."""

    def __init__(self, rate: float):
        self.rate = float(rate)
        self.tokens = float(rate)
        self.updated = time.monotonic()
        self._lock = threading.Lock()

    def allow(self) -> bool:
        with self._lock:
            now = time.monotonic()
            self.tokens = min(self.rate, self.tokens + (now - self.updated) * self.rate)
            self.updated = now
            if self.tokens >= 1.0:
                self.tokens -= 1.0
                return True
            return False


class BaseWireService:
    schemas: dict = {}
    name = "service"

    def __init__(self, rate_limit: float | None = None):
        self._bucket = TokenBucket(rate_limit) if rate_limit else None
        self._lock = threading.Lock()

    def handle_line(self, line: bytes) -> bytes:
        try:
            obj = wire.decode(line)
            op = wire.check_schema(obj, self.schemas)
        except wire.WireError:
            return wire.encode(wire.error_response("malformed"))
        if self._bucket is not None and not self._bucket.allow():
            return wire.encode(wire.error_response("rate"))
        try:
            with self._lock:
                resp = self.dispatch(op, obj)
        except MatchingError as exc:
            resp = wire.error_response(exc.code)
        except UnauthorizedError:
            resp = wire.error_response("unauthorized")
        except (ValueError, IdentityError):
            resp = wire.error_response("malformed")
        return wire.encode(resp)

    def dispatch(self, op: str, obj: dict) -> dict:  # pragma: no cover
        raise NotImplementedError


class MatchingWireService(BaseWireService):
    """Main-protocol matching endpoint: submit/query/delete/stats."""

    schemas = wire.MATCHING_SCHEMAS
    name = "matching"

    def __init__(self, service: MatchingService, pad_responses: bool = False,
                 rate_limit: float | None = None, rng: random.Random | None = None):
        super().__init__(rate_limit)
        self.service = service
        self.pad_responses = pad_responses
        self._rng = rng if rng is not None else random.SystemRandom()

    def dispatch(self, op, obj):
        if op == "submit":
            self.service.submit(obj["t1"], obj["t2"])
            return {"ok": True}
        if op == "query":
            matches = self.service.query(obj["t1"], obj["t2"])
            if self.pad_responses:
                matches = self._pad(matches)
            return {"matches": [[a, b] for a, b in matches]}
        if op == "delete":
            self.service.delete(obj["t1"], obj["t2"])
            return {"ok": True}
        if op == "stats":
            st = self.service.stats()
            return {"s_c": st.s_c, "s_mc": st.s_mc}
        if op == "advance_phase":
            self.service.advance_phase()
            return {"ok": True}
        raise AssertionError(op)

    def _pad(self, matches):
        # exactly one tuple leaves the server, match or not
        if matches:
            return matches[:1]
        n = self.service.n_bits
        return [(random_token(self._rng, n), random_token(self._rng, n))]


class SimpleWireService(BaseWireService):
    """KDF-variant endpoint: boolean membership on single tokens."""

    schemas = wire.SIMPLE_SCHEMAS
    name = "matching-simple"

    def __init__(self, service: SimpleService, rate_limit: float | None = None):
        super().__init__(rate_limit)
        self.service = service

    def dispatch(self, op, obj):
        if op == "simple_submit":
            self.service.submit(obj["t"])
            return {"ok": True}
        if op == "simple_query":
            return {"present": self.service.query(obj["t"])}
        if op == "stats":
            st = self.service.stats()
            return {"s_c": st.s_c, "s_mc": st.s_mc}
        if op == "advance_phase":
            self.service.advance_phase()
            return {"ok": True}
        raise AssertionError(op)


class KeyServerWireService(BaseWireService):
    schemas = wire.KEYSERVER_SCHEMAS
    name = "keyserver"

    def __init__(self, server: KeyServer, rate_limit: float | None = None):
        super().__init__(rate_limit)
        self.server = server

    def dispatch(self, op, obj):
        ident = Identity(obj["id"])
        if op == "getkey":
            return {"key": self.server.get_key(ident).hex()}
        if op == "enroll":
            self.server.enroll(ident, bytes.fromhex(obj["key"]), bytes.fromhex(obj["proof"]))
            return {"ok": True}
        raise AssertionError(op)


class DirectoryWireService(BaseWireService):
    schemas = wire.DIRECTORY_SCHEMAS
    name = "directory"

    def __init__(self, directory: KeyDirectory, rate_limit: float | None = None):
        super().__init__(rate_limit)
        self.directory = directory

    def dispatch(self, op, obj):
        ident = Identity(obj["id"])
        if op == "dir_put":
            for gate in obj["gates"]:
                if not is_token(gate):
                    raise ValueError("bad gate token")
            self.directory.put_key(ident, bytes.fromhex(obj["key"]), set(obj["gates"]),
                                   bytes.fromhex(obj["proof"]))
            return {"ok": True}
        if op == "dir_get":
            if not is_token(obj["token"]):
                # malformed tokens get the same denial as wrong tokens
                return wire.error_response("denied")
            key = self.directory.get_key(ident, obj["token"])
            if key is None:
                return wire.error_response("denied")
            return {"key": key.hex()}
        raise AssertionError(op)


class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self):
        line = self.rfile.readline(wire.MAX_LINE)
        if not line:
            return
        self.wfile.write(self.server.wire_service.handle_line(line.rstrip(b"\n")))


class LineServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, addr, wire_service):
        super().__init__(addr, _LineHandler)
        self.wire_service = wire_service


def start_server(wire_service, host: str = "127.0.0.1", port: int = 0) -> LineServer:
    """Start a line server on a background thread; .shutdown() stops it."""
    server = LineServer((host, port), wire_service)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    server._thread = thread
    return server
