"""Live session server: paces a simulation in wall-clock time and serves
telemetry/command streams to any number of clients.

The session thread is the single writer of simulation state.  Client
commands are queued by reader threads and applied at the next control
tick, so a served session fed a command script reproduces the equivalent
headless run exactly; pacing only changes wall time.

Clients may speak either raw newline-delimited JSON over TCP or the same
messages as WebSocket text frames (the handshake is auto-detected), which
is what the browser console uses.
"""

from __future__ import annotations

import json
import queue
import socket
import threading
import time
from typing import Any, Sequence

from buoysim.engine import SimSession
from buoysim.gateway import protocol, ws
from buoysim.scenario import Scenario

__all__ = ["SessionServer"]

HEARTBEAT_WALL_S = 2.0


class _Client:
    def __init__(self, sock: socket.socket, addr) -> None:
        self.sock = sock
        self.addr = addr
        self.is_ws = False
        self.write_lock = threading.Lock()
        self.telemetry_seq = 0
        self.alive = True

    def send_message(self, kind: str, seq: int, payload: dict[str, Any]) -> None:
        data = protocol.encode(kind, seq, payload)
        if self.is_ws:
            data = ws.encode_text_frame(data)
        try:
            with self.write_lock:
                self.sock.sendall(data)
        except OSError:
            self.alive = False

    def send_telemetry(self, payload: dict[str, Any]) -> None:
        self.telemetry_seq += 1
        self.send_message("telemetry", self.telemetry_seq, payload)

    def close(self) -> None:
        self.alive = False
        try:
            self.sock.close()
        except OSError:
            pass


class SessionServer:
    """Owns one simulation session and serves it on a TCP port."""

    def __init__(
        self,
        scenario: Scenario,
        port: int,
        pacing: float = 1.0,
        seed: int | None = None,
        script: Sequence[dict[str, Any]] | None = None,
        host: str = "127.0.0.1",
        start_paused: bool = False,
        heartbeat_s: float = HEARTBEAT_WALL_S,
    ) -> None:
        if pacing <= 0.0:
            raise ValueError("pacing must be > 0")
        self.session = SimSession(scenario, seed=seed, script=script)
        self.pacing = pacing
        self.paused = start_paused
        self.heartbeat_s = heartbeat_s
        self._listener = socket.create_server((host, port))
        self.port = self._listener.getsockname()[1]
        self._clients: list[_Client] = []
        self._clients_lock = threading.Lock()
        self._commands: queue.Queue[tuple[_Client, int, dict[str, Any]]] = queue.Queue()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> None:
        for target in (self._accept_loop, self._session_loop):
            thread = threading.Thread(target=target, daemon=True)
            thread.start()
            self._threads.append(thread)

    def stop(self) -> None:
        self._stop.set()
        try:
            self._listener.close()
        except OSError:
            pass
        with self._clients_lock:
            for client in self._clients:
                client.close()
        for thread in self._threads:
            thread.join(timeout=2.0)

    def serve_forever(self) -> None:
        self.start()
        try:
            while not self._stop.is_set():
                time.sleep(0.2)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    # -- client handling ----------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                sock, addr = self._listener.accept()
            except OSError:
                return
            client = _Client(sock, addr)
            thread = threading.Thread(target=self._reader_loop, args=(client,), daemon=True)
            thread.start()

    def _reader_loop(self, client: _Client) -> None:
        sock = client.sock
        # Peek briefly for a WebSocket upgrade; silent peers are plain
        # newline-JSON clients waiting for their snapshot.
        sock.settimeout(0.25)
        try:
            preamble = sock.recv(4096)
        except TimeoutError:
            preamble = b""
        except OSError:
            return
        sock.settimeout(None)
        buffer = b""
        decoder: ws.FrameDecoder | None = None
        if preamble and ws.is_websocket_request(preamble):
            request = preamble
            while b"\r\n\r\n" not in request:
                chunk = sock.recv(4096)
                if not chunk:
                    return
                request += chunk
            head, _, rest = request.partition(b"\r\n\r\n")
            response = ws.handshake_response(head)
            try:
                sock.sendall(response)
            except OSError:
                return
            if b"101" not in response.split(b"\r\n", 1)[0]:
                sock.close()
                return
            client.is_ws = True
            decoder = ws.FrameDecoder()
            buffer = rest
        else:
            buffer = preamble

        self._register(client)
        try:
            while not self._stop.is_set() and client.alive:
                if client.is_ws:
                    assert decoder is not None
                    try:
                        for kind, payload in decoder.feed(buffer):
                            if kind == "ping":
                                with client.write_lock:
                                    client.sock.sendall(ws.encode_pong(payload))
                            elif kind == "text":
                                self._handle_line(client, payload)
                    except ws.WsClosed:
                        return
                else:
                    while b"\n" in buffer:
                        line, _, buffer = buffer.partition(b"\n")
                        if line.strip():
                            self._handle_line(client, line)
                try:
                    data = sock.recv(4096)
                except OSError:
                    return
                if not data:
                    return
                buffer = data if client.is_ws else buffer + data
        finally:
            self._unregister(client)

    def _register(self, client: _Client) -> None:
        client.send_message("snapshot", 0, self._snapshot_payload())
        with self._clients_lock:
            self._clients.append(client)

    def _unregister(self, client: _Client) -> None:
        client.close()
        with self._clients_lock:
            if client in self._clients:
                self._clients.remove(client)

    def _handle_line(self, client: _Client, line: bytes) -> None:
        try:
            msg = protocol.parse_line(line)
        except protocol.ProtocolError as exc:
            seq = 0
            try:
                raw = json.loads(line)
                if isinstance(raw, dict) and isinstance(raw.get("seq"), int):
                    seq = raw["seq"]
            except (json.JSONDecodeError, TypeError):
                pass
            client.send_message("error", seq, {"message": str(exc)})
            return
        if msg["kind"] != "command":
            client.send_message("error", msg["seq"], {"message": "clients may only send commands"})
            return
        self._commands.put((client, msg["seq"], msg["payload"]))

    # -- session loop ---------------------------------------------------------

    def _snapshot_payload(self) -> dict[str, Any]:
        session = self.session
        gains = session.gains
        return {
            "schema_version": 1,
            "label": session.scenario.label,
            "mode": session.mode,
            "sim_time": session.sim_time,
            "paused": self.paused,
            "finished": session.finished(),
            "setpoint": session.setpoint,
            "gains": {"kp": gains.kp, "ki": gains.ki, "kd": gains.kd},
            "control_period": session.scenario.control_period,
            "tank_depth": session.scenario.robot.tank_depth,
        }

    def _drain_commands(self) -> list[tuple[_Client, int, dict[str, Any]]]:
        batch = []
        while True:
            try:
                batch.append(self._commands.get_nowait())
            except queue.Empty:
                return batch

    def _apply_commands(self, batch) -> None:
        for client, seq, payload in batch:
            action = payload.get("action")
            try:
                if action == "pause":
                    self.paused = True
                elif action == "resume":
                    self.paused = False
                elif action == "reset":
                    self.session.reset()
                else:
                    self.session.apply_command(payload)
            except (ValueError, KeyError, TypeError) as exc:
                client.send_message("error", seq, {"message": str(exc)})
                continue
            client.send_message("ack", seq, {"action": action})

    def _broadcast_telemetry(self, payload: dict[str, Any]) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            if client.alive:
                client.send_telemetry(payload)

    def _broadcast(self, kind: str, payload: dict[str, Any]) -> None:
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            if client.alive:
                client.send_message(kind, 0, payload)

    def _session_loop(self) -> None:
        period = self.session.scenario.control_period / self.pacing
        next_tick = time.monotonic()
        last_beat = time.monotonic()
        while not self._stop.is_set():
            now = time.monotonic()
            if now - last_beat >= self.heartbeat_s:
                self._broadcast("heartbeat", {"wall_time": time.time()})
                last_beat = now

            if self.paused or self.session.finished():
                self._apply_commands(self._drain_commands())
                next_tick = time.monotonic()
                time.sleep(0.01)
                continue

            if now < next_tick:
                time.sleep(min(next_tick - now, 0.02))
                continue

            self._apply_commands(self._drain_commands())
            record = self.session.tick()
            self._broadcast_telemetry(protocol.telemetry_payload(record))
            next_tick += period
            if next_tick < time.monotonic() - 1.0:
                next_tick = time.monotonic()  # fell far behind; do not burst
