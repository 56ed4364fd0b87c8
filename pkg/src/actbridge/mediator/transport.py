"""Manager-to-manager transports.

A frame is ``CONVERT <msg-id> <from> <to>`` on one line, the assertion-block
body, then a blank line.  Both transports are ordered and deliver one message
per frame.
"""

from __future__ import annotations

import queue
import socket
import socketserver
import threading
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional
from urllib.parse import urlparse


class FrameError(ValueError):
    pass


class TransportError(OSError):
    pass


@dataclass(frozen=True)
class Frame:
    message_id: str
    source: str
    target: str
    body: str

    def __post_init__(self) -> None:
        for name in ("message_id", "source", "target"):
            value = getattr(self, name)
            if not value or any(c.isspace() for c in value):
                raise FrameError(f"frame {name} must be a single non-empty token: {value!r}")
        if any(not line.strip() for line in self.body.strip("\n").split("\n")):
            raise FrameError("frame body must not contain blank lines")

    def encode(self) -> str:
        return f"CONVERT {self.message_id} {self.source} {self.target}\n{self.body.strip(chr(10))}\n\n"

    @classmethod
    def decode(cls, text: str) -> "Frame":
        frames = list(decode_stream(text.splitlines(keepends=True)))
        if len(frames) != 1:
            raise FrameError(f"expected one frame, found {len(frames)}")
        return frames[0]


def decode_stream(lines: Iterable[str]) -> Iterable[Frame]:
    header: Optional[list[str]] = None
    body: list[str] = []
    for line in lines:
        line = line.rstrip("\r\n")
        if header is None:
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4 or parts[0] != "CONVERT":
                raise FrameError(f"bad frame header {line!r}")
            header, body = parts, []
        elif line.strip():
            body.append(line)
        else:
            yield Frame(header[1], header[2], header[3], "\n".join(body) + "\n")
            header = None
    if header is not None:
        raise FrameError("frame not terminated by a blank line")


class InProcessTransport:
    """Deterministic per-address FIFO queues."""

    scheme = "inproc"

    def __init__(self) -> None:
        self._queues: dict[str, deque[Frame]] = {}
        self._lock = threading.Lock()

    def listen(self, address: str) -> str:
        with self._lock:
            self._queues.setdefault(address, deque())
        return address

    def send(self, address: str, frame: Frame) -> None:
        with self._lock:
            if address not in self._queues:
                raise TransportError(f"nobody listens on {address}")
            # round-trip through the wire form so both transports see the same bytes
            self._queues[address].append(Frame.decode(frame.encode()))

    def receive(self, address: str, timeout: float = 0.0) -> Optional[Frame]:
        with self._lock:
            q = self._queues.get(address)
            return q.popleft() if q else None

    def pending(self, address: str) -> int:
        with self._lock:
            return len(self._queues.get(address, ()))

    def close(self) -> None:
        pass


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        lines = (raw.decode("utf-8") for raw in self.rfile)
        try:
            for frame in decode_stream(lines):
                self.server.inbox.put(frame)  # type: ignore[attr-defined]
        except FrameError:
            return


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class TcpTransport:
    """Newline-delimited frames over TCP; ``listen`` binds an ephemeral port on localhost."""

    scheme = "tcp"

    def __init__(self, host: str = "127.0.0.1") -> None:
        self.host = host
        self._servers: dict[str, _Server] = {}
        self._inboxes: dict[str, "queue.Queue[Frame]"] = {}

    def listen(self, address: str = "") -> str:
        """Bind a fresh port; the requested address is only a label and is ignored."""
        server = _Server((self.host, 0), _Handler)
        server.inbox = queue.Queue()  # type: ignore[attr-defined]
        actual = f"tcp://{self.host}:{server.server_address[1]}"
        threading.Thread(target=server.serve_forever, daemon=True).start()
        self._servers[actual] = server
        self._inboxes[actual] = server.inbox  # type: ignore[attr-defined]
        return actual

    def send(self, address: str, frame: Frame) -> None:
        url = urlparse(address)
        if url.scheme != "tcp" or not url.hostname or not url.port:
            raise TransportError(f"not a tcp address: {address}")
        try:
            with socket.create_connection((url.hostname, url.port), timeout=5) as sock:
                sock.sendall(frame.encode().encode("utf-8"))
        except OSError as exc:
            raise TransportError(f"cannot reach {address}: {exc}") from exc

    def receive(self, address: str, timeout: float = 5.0) -> Optional[Frame]:
        inbox = self._inboxes.get(address)
        if inbox is None:
            return None
        try:
            return inbox.get(timeout=timeout)
        except queue.Empty:
            return None

    def pending(self, address: str) -> int:
        inbox = self._inboxes.get(address)
        return inbox.qsize() if inbox else 0

    def close(self) -> None:
        for server in self._servers.values():
            server.shutdown()
            server.server_close()
        self._servers.clear()
