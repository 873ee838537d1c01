"""Newline-delimited JSON wire protocol: codec, schemas, client side.

Every request is one JSON object on one line over a fresh connection;
the response is one line back and the connection closes.  Requests
carry no sender identity, no session token, and no fields beyond the
operation's exact schema.
"""

from __future__ import annotations

import json
import socket

from .member import TransportError

MAX_LINE = 1 << 20

# Exact field sets per operation, per service.
MATCHING_SCHEMAS = {
    "submit": {"op", "t1", "t2"},
    "query": {"op", "t1", "t2"},
    "delete": {"op", "t1", "t2"},
    "stats": {"op"},
    "advance_phase": {"op"},
}
SIMPLE_SCHEMAS = {
    "simple_submit": {"op", "t"},
    "simple_query": {"op", "t"},
    "stats": {"op"},
    "advance_phase": {"op"},
}
KEYSERVER_SCHEMAS = {
    "getkey": {"op", "id"},
    "enroll": {"op", "id", "key", "proof"},
}
DIRECTORY_SCHEMAS = {
    "dir_put": {"op", "id", "key", "gates", "proof"},
    "dir_get": {"op", "id", "token"},
}


class WireError(Exception):
    pass


def encode(obj: dict) -> bytes:
    """Canonical one-line encoding: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode() + b"\n"


def decode(line: bytes) -> dict:
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise WireError(f"bad json: {exc}") from exc
    if not isinstance(obj, dict):
        raise WireError("request must be a json object")
    return obj


def check_schema(obj: dict, schemas: dict) -> str:
    """Return the op name iff the request matches its schema exactly."""
    op = obj.get("op")
    if not isinstance(op, str) or op not in schemas:
        raise WireError(f"unknown op {op!r}")
    if set(obj) != schemas[op]:
        raise WireError("unexpected request fields")
    for key, value in obj.items():
        if key == "gates":
            if not isinstance(value, list) or not all(isinstance(g, str) for g in value):
                raise WireError("gates must be a list of strings")
        elif not isinstance(value, str):
            raise WireError(f"field {key!r} must be a string")
    return op


def error_response(code: str) -> dict:
    return {"err": code}


def read_line(sock: socket.socket, max_line: int = MAX_LINE) -> bytes:
    data = bytearray()
    while b"\n" not in data:
        chunk = sock.recv(4096)
        if not chunk:
            break
        data.extend(chunk)
        if len(data) > max_line:
            raise WireError("line too long")
    if not data:
        raise WireError("connection closed before a full line arrived")
    return bytes(data.split(b"\n", 1)[0])


def request_once(addr: tuple[str, int], obj: dict, timeout: float = 10.0) -> dict:
    """Send one request on a fresh connection and read one response."""
    try:
        with socket.create_connection(addr, timeout=timeout) as sock:
            sock.sendall(encode(obj))
            line = read_line(sock)
    except (OSError, WireError) as exc:
        raise TransportError(f"request to {addr} failed: {exc}") from exc
    try:
        return decode(line)
    except WireError as exc:
        raise TransportError(f"bad response from {addr}: {exc}") from exc


class SocketTransport:
    """Connection-per-message client transport (the anonymity contract)."""

    def __init__(self, addr: tuple[str, int], timeout: float = 10.0):
        self.addr = (addr[0], int(addr[1]))
        self.timeout = timeout

    def request(self, obj: dict) -> dict:
        return request_once(self.addr, obj, self.timeout)


class InProcTransport:
    """Drives a wire service in process, through the full codec."""

    def __init__(self, service):
        self._service = service

    def request(self, obj: dict) -> dict:
        return decode(self._service.handle_line(encode(obj)))


def parse_addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host, int(port)
