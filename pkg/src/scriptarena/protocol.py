"""Agent wire protocol: newline-delimited JSON messages over a socket or stdio.

One JSON object per line, UTF-8, schema version "wire-v1" (the field-level
contract is published in docs/wire-schema.json). The harness drives: it sends
observation messages and waits for exactly one action per observation. Parse
feedback re-solicits with a fresh sequence number; sequence numbers increase
monotonically per session over all messages sent by each side.
"""

from __future__ import annotations

import json
import socket
import socketserver
import sys
import threading
from dataclasses import asdict, dataclass, field
from typing import BinaryIO, Callable, Iterator, Protocol

WIRE_VERSION = "wire-v1"
MAX_LINE_BYTES = 32 * 1024 * 1024  # a 512x512 PNG in base64 fits comfortably


class FramingError(ValueError):
    """A line was not a valid message: bad JSON, unknown type, missing fields."""


class AgentTimeoutError(TimeoutError):
    """The agent did not answer an observation within the response timeout."""


class SessionClosedError(ConnectionError):
    pass


class ReplayError(ValueError):
    """A transcript is truncated or malformed and cannot be replayed."""


@dataclass(frozen=True)
class SessionPolicy:
    max_scripts_per_episode: int = 30
    max_agent_failures: int = 3
    response_timeout: float = 120.0
    max_relaunches: int = 3

    def validate(self) -> None:
        if self.max_scripts_per_episode <= 0 or self.max_agent_failures <= 0:
            raise ValueError("session budgets must be positive")
        if self.response_timeout <= 0:
            raise ValueError("response timeout must be positive")


DEFAULT_POLICY = SessionPolicy()


@dataclass(frozen=True)
class SessionHello:
    session_id: str
    seq: int
    suite_id: str
    wire_version: str = WIRE_VERSION
    policy: dict = field(default_factory=dict)
    type: str = "hello"


@dataclass(frozen=True)
class ObservationMsg:
    session_id: str
    seq: int
    task_id: str
    step: int
    health: float
    cumulative_reward: float
    scripts_remaining: int
    image_b64: str
    text_prompt: str
    extra_images_b64: tuple[str, ...] = ()
    type: str = "observation"


@dataclass(frozen=True)
class ActionMsg:
    session_id: str
    seq: int
    raw_script_text: str
    type: str = "action"


@dataclass(frozen=True)
class ParseFeedback:
    session_id: str
    seq: int
    error_kind: str
    error_message: str
    retry_index: int
    type: str = "parse_feedback"


@dataclass(frozen=True)
class EpisodeEnd:
    session_id: str
    seq: int
    task_id: str
    passed: bool
    final_reward: float
    reason: str
    type: str = "episode_end"


@dataclass(frozen=True)
class Abort:
    session_id: str
    seq: int
    reason: str
    type: str = "abort"


Message = SessionHello | ObservationMsg | ActionMsg | ParseFeedback | EpisodeEnd | Abort

_TYPES: dict[str, type] = {
    "hello": SessionHello,
    "observation": ObservationMsg,
    "action": ActionMsg,
    "parse_feedback": ParseFeedback,
    "episode_end": EpisodeEnd,
    "abort": Abort,
}


def to_wire(msg: Message) -> dict:
    d = asdict(msg)
    if isinstance(msg, ObservationMsg):
        d["extra_images_b64"] = list(msg.extra_images_b64)
    return d


def encode_line(msg: Message) -> bytes:
    return json.dumps(to_wire(msg), sort_keys=True, separators=(",", ":")).encode("utf-8") + b"\n"


def parse_line(line: bytes | str) -> Message:
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FramingError(f"line is not utf-8: {exc}") from None
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FramingError(f"line is not json: {exc}") from None
    if not isinstance(data, dict):
        raise FramingError("message must be a json object")
    mtype = data.get("type")
    cls = _TYPES.get(mtype)
    if cls is None:
        raise FramingError(f"unknown message type {mtype!r}")
    if "extra_images_b64" in data and isinstance(data["extra_images_b64"], list):
        data["extra_images_b64"] = tuple(data["extra_images_b64"])
    try:
        return cls(**data)
    except TypeError as exc:
        raise FramingError(f"bad fields for {mtype!r}: {exc}") from None


# --- session interfaces ------------------------------------------------------


class AgentSession(Protocol):
    """What the harness needs from an agent connection (local or remote)."""

    session_id: str

    def send(self, msg: Message) -> None: ...

    def receive_action(self, timeout: float) -> ActionMsg: ...

    def close(self) -> None: ...


class TranscriptWriter:
    """Append-only JSONL log of every message either side sent."""

    def __init__(self, path):
        self._fh = open(path, "w", encoding="utf-8")
        self._fh.write(json.dumps({"transcript": "v1", "wire_version": WIRE_VERSION}) + "\n")
        self.path = path

    def log(self, direction: str, msg: Message) -> None:
        row = {"dir": direction, "msg": to_wire(msg)}
        self._fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TranscriptWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_transcript(path) -> list[tuple[str, Message]]:
    """Load a transcript written by TranscriptWriter. Raises ReplayError."""
    rows: list[tuple[str, Message]] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        try:
            head = json.loads(header)
        except json.JSONDecodeError as exc:
            raise ReplayError(f"bad transcript header: {exc}") from None
        if head.get("transcript") != "v1":
            raise ReplayError("not a v1 transcript")
        for i, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                msg = parse_line(json.dumps(row["msg"]))
            except (json.JSONDecodeError, KeyError, FramingError) as exc:
                raise ReplayError(f"transcript line {i}: {exc}") from None
            rows.append((row.get("dir", "?"), msg))
    return rows


class RecordingSession:
    """Wraps any AgentSession, mirroring traffic into a TranscriptWriter."""

    def __init__(self, inner: AgentSession, writer: TranscriptWriter):
        self.inner = inner
        self.writer = writer

    @property
    def session_id(self) -> str:
        return self.inner.session_id

    def send(self, msg: Message) -> None:
        self.writer.log("out", msg)
        self.inner.send(msg)

    def receive_action(self, timeout: float) -> ActionMsg:
        try:
            action = self.inner.receive_action(timeout)
        except AgentTimeoutError:
            self.writer.log("note", Abort(session_id=self.session_id, seq=-1, reason="timeout"))
            raise
        self.writer.log("in", action)
        return action

    def close(self) -> None:
        self.inner.close()


class LocalAgentSession:
    """In-process adapter: wraps a policy callable into the session interface.

    The responder receives (ObservationMsg, privileged) and returns raw script
    text. `privileged` carries (EpisodeState, ArenaSpec) for oracle policies
    and never crosses a wire.
    """

    _counter = 0
    _lock = threading.Lock()

    def __init__(self, responder: Callable[[ObservationMsg, object], str], needs_privileged: bool = False):
        with LocalAgentSession._lock:
            LocalAgentSession._counter += 1
            self.session_id = f"local-{LocalAgentSession._counter:04d}"
        self._responder = responder
        self.needs_privileged = needs_privileged
        self._pending: ObservationMsg | None = None
        self._privileged: object = None
        self._seq = 0

    def attach_privileged(self, privileged: object) -> None:
        self._privileged = privileged

    def send(self, msg: Message) -> None:
        if isinstance(msg, ObservationMsg):
            self._pending = msg

    def receive_action(self, timeout: float) -> ActionMsg:
        if self._pending is None:
            raise SessionClosedError("no pending observation")
        obs = self._pending
        self._pending = None
        text = self._responder(obs, self._privileged if self.needs_privileged else None)
        self._seq += 1
        return ActionMsg(session_id=self.session_id, seq=self._seq, raw_script_text=text)

    def close(self) -> None:
        self._pending = None


# --- byte-stream sessions ----------------------------------------------------


class StreamSession:
    """Session over a pair of binary streams (socket makefile or stdio)."""

    def __init__(self, session_id: str, rfile: BinaryIO, wfile: BinaryIO):
        self.session_id = session_id
        self._rfile = rfile
        self._wfile = wfile
        self._send_lock = threading.Lock()

    def send(self, msg: Message) -> None:
        with self._send_lock:
            try:
                self._wfile.write(encode_line(msg))
                self._wfile.flush()
            except (BrokenPipeError, OSError) as exc:
                raise SessionClosedError(str(exc)) from None

    def receive_action(self, timeout: float) -> ActionMsg:
        self._set_timeout(timeout)
        try:
            line = self._rfile.readline(MAX_LINE_BYTES)
        except (socket.timeout, TimeoutError):
            raise AgentTimeoutError("agent did not reply in time") from None
        except OSError as exc:
            raise SessionClosedError(str(exc)) from None
        if not line:
            raise SessionClosedError("agent closed the connection")
        msg = parse_line(line)
        if not isinstance(msg, ActionMsg):
            raise FramingError(f"expected an action message, got {msg.type!r}")
        return msg

    def _set_timeout(self, timeout: float) -> None:
        raw = getattr(self._rfile, "raw", None)
        sock = getattr(raw, "_sock", None) if raw is not None else None
        # socketserver rfile wraps the connection; reach it when present
        if hasattr(self._rfile, "_sock"):
            self._rfile._sock.settimeout(timeout)  # type: ignore[attr-defined]
        elif sock is not None:
            sock.settimeout(timeout)

    def close(self) -> None:
        try:
            self._rfile.close()
        finally:
            self._wfile.close()


class SocketAgentSession(StreamSession):
    def __init__(self, session_id: str, sock: socket.socket):
        self._socket = sock
        super().__init__(session_id, sock.makefile("rb"), sock.makefile("wb"))

    def _set_timeout(self, timeout: float) -> None:
        self._socket.settimeout(timeout)

    def close(self) -> None:
        try:
            super().close()
        finally:
            self._socket.close()


class ProtocolServer:
    """TCP acceptor: each connected agent becomes one session, one at a time.

    handler(session) runs on the accept thread's worker; exceptions abort only
    that session. Used by `scriptarena serve --bind`.
    """

    def __init__(self, host: str, port: int, handler: Callable[[SocketAgentSession], None]):
        self._handler = handler
        self._count = 0
        self._count_lock = threading.Lock()
        outer = self

        class _Handler(socketserver.BaseRequestHandler):
            def handle(self) -> None:  # noqa: D102
                with outer._count_lock:
                    outer._count += 1
                    sid = f"s-{outer._count:04d}"
                session = SocketAgentSession(sid, self.request)
                try:
                    outer._handler(session)
                except (SessionClosedError, AgentTimeoutError, FramingError):
                    pass
                finally:
                    try:
                        session.close()
                    except OSError:
                        pass

        class _Server(socketserver.ThreadingTCPServer):
            allow_reuse_address = True
            daemon_threads = True

        self._server = _Server((host, port), _Handler)

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def serve_in_thread(self) -> threading.Thread:
        t = threading.Thread(target=self._server.serve_forever, daemon=True)
        t.start()
        return t

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()


def stdio_session(session_id: str = "stdio-0001") -> StreamSession:
    """Session over this process's stdin/stdout (for `serve --stdio`)."""
    return StreamSession(session_id, sys.stdin.buffer, sys.stdout.buffer)


# --- client side ---------------------------------------------------------------


class AgentClient:
    """Minimal client for external agent processes and conformance tests.

    Connects to a harness `serve --bind` endpoint, then answers observations
    with `respond(observation) -> raw script text` until the stream ends.
    """

    def __init__(self, host: str, port: int):
        self._sock = socket.create_connection((host, port))
        self._rfile = self._sock.makefile("rb")
        self._wfile = self._sock.makefile("wb")
        self.session_id: str | None = None
        self._seq = 0

    def messages(self) -> Iterator[Message]:
        while True:
            line = self._rfile.readline(MAX_LINE_BYTES)
            if not line:
                return
            yield parse_line(line)

    def send_action(self, raw_script_text: str) -> None:
        self._seq += 1
        msg = ActionMsg(
            session_id=self.session_id or "?", seq=self._seq, raw_script_text=raw_script_text
        )
        self._wfile.write(encode_line(msg))
        self._wfile.flush()

    def run(self, respond: Callable[[ObservationMsg], str]) -> list[EpisodeEnd]:
        ends: list[EpisodeEnd] = []
        for msg in self.messages():
            if isinstance(msg, SessionHello):
                self.session_id = msg.session_id
            elif isinstance(msg, ObservationMsg):
                self.send_action(respond(msg))
            elif isinstance(msg, EpisodeEnd):
                ends.append(msg)
            elif isinstance(msg, Abort):
                break
        return ends

    def close(self) -> None:
        try:
            self._rfile.close()
            self._wfile.close()
        finally:
            self._sock.close()
