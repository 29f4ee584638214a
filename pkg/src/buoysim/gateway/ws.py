"""Minimal RFC 6455 WebSocket support so the browser console can speak the
same newline-JSON protocol: one protocol message per text frame.

Server side only: client frames arrive masked, server frames leave
unmasked.  Fragmentation is not produced and incoming fragments are
rejected; control frames (ping, close) are handled.
"""

from __future__ import annotations

import base64
import hashlib
import struct

__all__ = [
    "FrameDecoder",
    "WsClosed",
    "encode_text_frame",
    "encode_pong",
    "encode_close",
    "handshake_response",
    "is_websocket_request",
]

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class WsClosed(Exception):
    pass


def is_websocket_request(preamble: bytes) -> bool:
    return preamble.startswith(b"GET ")


def handshake_response(request: bytes) -> bytes:
    """HTTP 101 response for an upgrade request, or 400 on a bad one."""
    headers = {}
    for raw in request.split(b"\r\n")[1:]:
        if b":" in raw:
            name, _, value = raw.partition(b":")
            headers[name.strip().lower()] = value.strip()
    key = headers.get(b"sec-websocket-key")
    if key is None or b"websocket" not in headers.get(b"upgrade", b"").lower():
        return b"HTTP/1.1 400 Bad Request\r\nConnection: close\r\n\r\n"
    accept = base64.b64encode(hashlib.sha1(key + _GUID.encode()).digest())
    return (
        b"HTTP/1.1 101 Switching Protocols\r\n"
        b"Upgrade: websocket\r\n"
        b"Connection: Upgrade\r\n"
        b"Sec-WebSocket-Accept: " + accept + b"\r\n\r\n"
    )


def _frame(opcode: int, payload: bytes) -> bytes:
    header = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        header += bytes([n])
    elif n < 1 << 16:
        header += bytes([126]) + struct.pack(">H", n)
    else:
        header += bytes([127]) + struct.pack(">Q", n)
    return header + payload


def encode_text_frame(text: str | bytes) -> bytes:
    data = text.encode("utf-8") if isinstance(text, str) else text
    return _frame(OP_TEXT, data)


def encode_pong(payload: bytes = b"") -> bytes:
    return _frame(OP_PONG, payload)


def encode_close(code: int = 1000) -> bytes:
    return _frame(OP_CLOSE, struct.pack(">H", code))


class FrameDecoder:
    """Incremental decoder for client-to-server (masked) frames.

    feed() returns a list of decoded text payloads; ping frames surface as
    ("ping", payload) so the owner can reply, and a close frame raises
    WsClosed.
    """

    def __init__(self) -> None:
        self._buffer = bytearray()

    def feed(self, data: bytes) -> list[tuple[str, bytes]]:
        self._buffer.extend(data)
        out = []
        while True:
            frame = self._try_decode()
            if frame is None:
                return out
            out.append(frame)

    def _try_decode(self) -> tuple[str, bytes] | None:
        buf = self._buffer
        if len(buf) < 2:
            return None
        first, second = buf[0], buf[1]
        fin = first & 0x80
        opcode = first & 0x0F
        masked = second & 0x80
        length = second & 0x7F
        offset = 2
        if length == 126:
            if len(buf) < 4:
                return None
            length = struct.unpack_from(">H", buf, 2)[0]
            offset = 4
        elif length == 127:
            if len(buf) < 10:
                return None
            length = struct.unpack_from(">Q", buf, 2)[0]
            offset = 10
        mask = b""
        if masked:
            if len(buf) < offset + 4:
                return None
            mask = bytes(buf[offset : offset + 4])
            offset += 4
        if len(buf) < offset + length:
            return None
        payload = bytes(buf[offset : offset + length])
        del buf[: offset + length]
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == OP_CLOSE:
            raise WsClosed()
        if opcode == OP_PING:
            return ("ping", payload)
        if opcode == OP_PONG:
            return ("pong", payload)
        if not fin or opcode not in (OP_TEXT, 0x0):
            raise WsClosed()  # fragmentation unsupported; drop the peer
        return ("text", payload)
