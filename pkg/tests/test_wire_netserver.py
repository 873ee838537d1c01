"""Wire codec, request schemas, socket servers, and golden transcripts."""

import json
import socket

import pytest

from mcd import wire
from mcd.authority import EnrollmentSecrets
from mcd.directory import KeyDirectory
from mcd.identity import Identity
from mcd.keyserver import KeyServer
from mcd.matching import MatchingService
from mcd.member import TransportError
from mcd.netserver import (
    DirectoryWireService,
    KeyServerWireService,
    MatchingWireService,
    SimpleWireService,
    start_server,
)
from mcd.simple import SimpleService
from mcd.suites import TransparentSuite

T1 = "a" * 64
T2 = "1" * 64
T3 = "2" * 64


@pytest.fixture()
def matching_server():
    service = MatchingWireService(MatchingService("static"))
    server = start_server(service)
    yield server, service
    server.shutdown()


def _raw_exchange(addr, raw: bytes) -> bytes:
    with socket.create_connection(addr, timeout=5) as sock:
        sock.sendall(raw)
        return wire.read_line(sock)


class TestCodec:
    def test_encode_is_canonical(self):
        assert (
            wire.encode({"t2": T2, "op": "submit", "t1": T1})
            == b'{"op":"submit","t1":"' + T1.encode() + b'","t2":"' + T2.encode() + b'"}\n'
        )

    def test_decode_rejects_non_objects(self):
        with pytest.raises(wire.WireError):
            wire.decode(b"[1,2]")
        with pytest.raises(wire.WireError):
            wire.decode(b"{bad json")

    def test_schema_exact_fields(self):
        wire.check_schema({"op": "submit", "t1": T1, "t2": T2}, wire.MATCHING_SCHEMAS)
        with pytest.raises(wire.WireError):
            wire.check_schema({"op": "submit", "t1": T1}, wire.MATCHING_SCHEMAS)
        with pytest.raises(wire.WireError):
            # no sender identity, session token, or any extra field
            wire.check_schema(
                {"op": "submit", "t1": T1, "t2": T2, "sender": "alice"},
                wire.MATCHING_SCHEMAS,
            )
        with pytest.raises(wire.WireError):
            wire.check_schema({"op": "nonesuch"}, wire.MATCHING_SCHEMAS)
        with pytest.raises(wire.WireError):
            wire.check_schema({"op": "submit", "t1": 3, "t2": T2}, wire.MATCHING_SCHEMAS)

    def test_parse_addr(self):
        assert wire.parse_addr("127.0.0.1:9000") == ("127.0.0.1", 9000)
        with pytest.raises(ValueError):
            wire.parse_addr("nonsense")


class TestGoldenTranscript:
    """Pins the exact bytes of the wire encoding."""

    def test_static_session(self, matching_server):
        server, _ = matching_server
        addr = server.server_address
        script = [
            (
                b'{"op":"submit","t1":"%s","t2":"%s"}\n' % (T1.encode(), T2.encode()),
                b'{"ok":true}\n',
            ),
            (
                b'{"op":"submit","t1":"%s","t2":"%s"}\n' % (T1.encode(), T3.encode()),
                b'{"ok":true}\n',
            ),
            (b'{"op":"advance_phase"}\n', b'{"ok":true}\n'),
            (
                b'{"op":"query","t1":"%s","t2":"%s"}\n' % (T1.encode(), T2.encode()),
                b'{"matches":[["%s","%s"]]}\n' % (T1.encode(), T3.encode()),
            ),
            (b'{"op":"stats"}\n', b'{"s_c":2,"s_mc":2}\n'),
            (
                b'{"op":"submit","t1":"%s","t2":"%s"}\n' % (T1.encode(), T2.encode()),
                b'{"err":"phase"}\n',
            ),
        ]
        for raw_req, raw_resp in script:
            assert _raw_exchange(addr, raw_req) + b"\n" == raw_resp

    def test_hex64_lengths_enforced(self, matching_server):
        server, _ = matching_server
        addr = server.server_address
        bad = json.dumps({"op": "submit", "t1": "a" * 63, "t2": T2}).encode() + b"\n"
        assert _raw_exchange(addr, bad) == b'{"err":"malformed"}'
        bad = json.dumps({"op": "submit", "t1": "G" * 64, "t2": T2}).encode() + b"\n"
        assert _raw_exchange(addr, bad) == b'{"err":"malformed"}'

    def test_malformed_json_line(self, matching_server):
        server, _ = matching_server
        assert _raw_exchange(server.server_address, b"not json\n") == b'{"err":"malformed"}'


class TestServerBehaviour:
    def test_one_connection_per_request(self, matching_server):
        server, _ = matching_server
        with socket.create_connection(server.server_address, timeout=5) as sock:
            sock.sendall(wire.encode({"op": "stats"}))
            wire.read_line(sock)
            # server closes after one response; a second request gets nothing
            sock.sendall(wire.encode({"op": "stats"}))
            assert sock.recv(4096) == b""

    def test_socket_transport(self, matching_server):
        server, _ = matching_server
        transport = wire.SocketTransport(server.server_address)
        assert transport.request({"op": "stats"}) == {"s_c": 0, "s_mc": 0}

    def test_transport_error_on_dead_port(self):
        transport = wire.SocketTransport(("127.0.0.1", 1), timeout=0.2)
        with pytest.raises(TransportError):
            transport.request({"op": "stats"})

    def test_rate_limit(self):
        service = MatchingWireService(MatchingService("dynamic"), rate_limit=2)
        transport = wire.InProcTransport(service)
        assert transport.request({"op": "stats"}) == {"s_c": 0, "s_mc": 0}
        assert transport.request({"op": "stats"}) == {"s_c": 0, "s_mc": 0}
        assert transport.request({"op": "stats"}) == {"err": "rate"}

    def test_pad_responses_exactly_one_tuple(self):
        import random as _random

        service = MatchingWireService(
            MatchingService("dynamic"), pad_responses=True, rng=_random.Random(1)
        )
        transport = wire.InProcTransport(service)
        resp = transport.request({"op": "query", "t1": T1, "t2": T2})
        assert len(resp["matches"]) == 1  # random filler, no real match
        filler = resp["matches"][0]
        assert filler != [T1, T2]
        transport.request({"op": "query", "t1": T1, "t2": T3})
        resp = transport.request({"op": "query", "t1": T1, "t2": "3" * 64})
        assert len(resp["matches"]) == 1
        assert resp["matches"][0][0] == T1

    def test_mode_errors_on_wire(self):
        service = MatchingWireService(MatchingService("dynamic"))
        transport = wire.InProcTransport(service)
        assert transport.request({"op": "submit", "t1": T1, "t2": T2}) == {"err": "mode"}
        assert transport.request({"op": "advance_phase"}) == {"err": "mode"}
        assert transport.request({"op": "delete", "t1": T1, "t2": T2}) == {"ok": True}

    def test_simple_ops_rejected_by_main_service(self):
        service = MatchingWireService(MatchingService("static"))
        transport = wire.InProcTransport(service)
        assert transport.request({"op": "simple_submit", "t": T1}) == {"err": "malformed"}

    def test_simple_wire_service(self):
        service = SimpleWireService(SimpleService())
        transport = wire.InProcTransport(service)
        assert transport.request({"op": "simple_submit", "t": T1}) == {"ok": True}
        assert transport.request({"op": "simple_query", "t": T1}) == {"err": "phase"}
        assert transport.request({"op": "advance_phase"}) == {"ok": True}
        assert transport.request({"op": "simple_query", "t": T1}) == {"present": True}
        assert transport.request({"op": "simple_query", "t": T2}) == {"present": False}
        assert transport.request({"op": "submit", "t1": T1, "t2": T2}) == {"err": "malformed"}


class TestAuxiliaryServices:
    def test_keyserver_wire(self, tsuite):
        enrollment = EnrollmentSecrets(b"k" * 32)
        ks = KeyServer(tsuite, enrollment, b"p" * 32)
        transport = wire.InProcTransport(KeyServerWireService(ks))
        alice = Identity("alice")
        resp1 = transport.request({"op": "getkey", "id": "alice"})
        resp2 = transport.request({"op": "getkey", "id": "alice"})
        assert resp1 == resp2 and set(resp1) == {"key"}
        bad = transport.request(
            {"op": "enroll", "id": "alice", "key": tsuite.gen1.enc.hex(), "proof": "00"}
        )
        assert bad == {"err": "unauthorized"}
        pk = tsuite.scalar_mul(tsuite.gen1, 7)
        ok = transport.request(
            {
                "op": "enroll",
                "id": "alice",
                "key": pk.enc.hex(),
                "proof": enrollment.proof_for(alice).hex(),
            }
        )
        assert ok == {"ok": True}
        assert transport.request({"op": "getkey", "id": "alice"}) == {"key": pk.enc.hex()}

    def test_directory_wire_uniform_denial(self):
        enrollment = EnrollmentSecrets(b"k" * 32)
        service = DirectoryWireService(KeyDirectory(enrollment))
        alice = Identity("alice")
        raw_missing = service.handle_line(
            wire.encode({"op": "dir_get", "id": "ghost", "token": T1})
        )
        service.handle_line(
            wire.encode(
                {
                    "op": "dir_put",
                    "id": "alice",
                    "key": "aabb",
                    "gates": [T2],
                    "proof": enrollment.proof_for(alice).hex(),
                }
            )
        )
        raw_bad_token = service.handle_line(
            wire.encode({"op": "dir_get", "id": "alice", "token": T1})
        )
        assert raw_missing == raw_bad_token == b'{"err":"denied"}\n'
        good = service.handle_line(
            wire.encode({"op": "dir_get", "id": "alice", "token": T2})
        )
        assert good == b'{"key":"aabb"}\n'
