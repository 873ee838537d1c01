"""Transcript-recording anonymous transports (in-process and socket)."""

from __future__ import annotations

import socket
import threading
from dataclasses import dataclass

from .. import wire
from ..member import TransportError


@dataclass(frozen=True)
class TranscriptEntry:
    service: str
    request: bytes
    response: bytes


class Transcript:
    """Everything that crossed the wire, with no sender attribution."""

    def __init__(self):
        self.entries: list[TranscriptEntry] = []
        self._lock = threading.Lock()

    def record(self, service: str, request: bytes, response: bytes) -> None:
        with self._lock:
            self.entries.append(TranscriptEntry(service, request, response))

    def message_count(self, service: str | None = None) -> int:
        return sum(1 for e in self.entries if service is None or e.service == service)

    def byte_count(self, service: str | None = None) -> int:
        return sum(
            len(e.request) + len(e.response)
            for e in self.entries
            if service is None or e.service == service
        )

    def op_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for e in self.entries:
            try:
                op = wire.decode(e.request).get("op", "?")
            except wire.WireError:
                op = "?"
            counts[op] = counts.get(op, 0) + 1
        return counts

    def requests(self, service: str | None = None) -> list[bytes]:
        return [e.request for e in self.entries if service is None or e.service == service]

    def scan(self, forbidden: list[bytes], service: str | None = None) -> list[bytes]:
        """Forbidden byte strings found anywhere in the recorded traffic."""
        hits = []
        for e in self.entries:
            if service is not None and e.service != service:
                continue
            blob = e.request + e.response
            hits.extend(pat for pat in forbidden if pat in blob)
        return hits


class RecordingTransport:
    """Connection-per-message transport that logs raw lines."""

    def __init__(self, send_line, service: str, transcript: Transcript):
        self._send_line = send_line
        self.service = service
        self.transcript = transcript

    def request(self, obj: dict) -> dict:
        line = wire.encode(obj)
        raw = self._send_line(line)
        self.transcript.record(self.service, line.rstrip(b"\n"), raw)
        try:
            return wire.decode(raw)
        except wire.WireError as exc:
            raise TransportError(f"bad response: {exc}") from exc


def inproc_transport(wire_service, transcript: Transcript, service_name: str | None = None):
    name = service_name or wire_service.name
    return RecordingTransport(
        lambda line: wire_service.handle_line(line.rstrip(b"\n")).rstrip(b"\n"),
        name,
        transcript,
    )


def socket_transport(addr, transcript: Transcript, service_name: str, timeout: float = 10.0):
    def send_line(line: bytes) -> bytes:
        try:
            with socket.create_connection(addr, timeout=timeout) as sock:
                sock.sendall(line)
                return wire.read_line(sock)
        except (OSError, wire.WireError) as exc:
            raise TransportError(f"request to {addr} failed: {exc}") from exc

    return RecordingTransport(send_line, service_name, transcript)
