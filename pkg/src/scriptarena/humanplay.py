"""HTTP bridge for human play sessions.

Exposes the same message flow as the TCP wire, but over JSON HTTP endpoints a
browser can poll:

    POST /api/session                 {"tasks": ["tutorial"]} -> {"session_id": ...}
    GET  /api/session/<id>/messages?after=N   long-poll, ordered wire messages
    POST /api/session/<id>/action     {"raw_script_text": "Go(5);"} -> {"ok": true}

Messages are the ndjson wire objects verbatim; ``after`` is a cursor counting
messages already delivered. Anything outside /api/ serves static files from the
configured directory so a built client can be played from the same origin.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import pathlib
import queue
import threading
import time
import urllib.parse
from dataclasses import replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .harness import SuiteConfig, run_suite
from .protocol import Abort, ActionMsg, AgentTimeoutError, DEFAULT_POLICY, Message, to_wire
from .render import DEFAULT_CAMERA

logger = logging.getLogger(__name__)

HUMAN_RESPONSE_TIMEOUT = 3600.0
LONG_POLL_SECONDS = 25.0


class HumanBridgeSession:
    """Agent-session adapter whose counterpart is a human behind HTTP polls."""

    def __init__(self, session_id: str):
        self.session_id = session_id
        self.closed = False
        self._messages: list[dict] = []
        self._cond = threading.Condition()
        self._actions: queue.Queue[ActionMsg] = queue.Queue()

    def send(self, message: Message) -> None:
        with self._cond:
            self._messages.append(to_wire(message))
            self._cond.notify_all()

    def receive_action(self, timeout: float) -> ActionMsg:
        try:
            return self._actions.get(timeout=timeout)
        except queue.Empty:
            raise AgentTimeoutError(f"no human action within {timeout}s") from None

    def close(self) -> None:
        with self._cond:
            self.closed = True
            self._cond.notify_all()

    def push_action(self, raw_script_text: str) -> None:
        self._actions.put(
            ActionMsg(session_id=self.session_id, seq=0, raw_script_text=raw_script_text)
        )

    def messages_after(self, after: int, wait_seconds: float) -> tuple[list[dict], bool]:
        deadline = time.monotonic() + wait_seconds
        with self._cond:
            while True:
                chunk = self._messages[after:]
                if chunk or self.closed:
                    return list(chunk), self.closed
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return [], self.closed
                self._cond.wait(remaining)


class HumanPlayServer:
    """Threaded HTTP server hosting human play sessions and optional static files."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        *,
        default_tasks: tuple[str, ...] = ("tutorial",),
        mode: str = "base",
        static_dir: str | pathlib.Path | None = None,
        out_dir: str | pathlib.Path | None = None,
    ):
        self._default_tasks = default_tasks
        self._mode = mode
        self._static_dir = pathlib.Path(static_dir).resolve() if static_dir else None
        self._out_dir = pathlib.Path(out_dir) if out_dir else None
        self._sessions: dict[str, HumanBridgeSession] = {}
        self._lock = threading.Lock()
        self._counter = 0
        handler = _make_handler(self)
        self._http = ThreadingHTTPServer((host, port), handler)
        self._http.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._http.server_address[:2]
        return str(host), int(port)

    def serve_in_thread(self) -> None:
        self._thread = threading.Thread(target=self._http.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self._http.serve_forever()

    def shutdown(self) -> None:
        self._http.shutdown()
        self._http.server_close()
        with self._lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            session.close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def create_session(self, tasks: tuple[str, ...] | None = None) -> str:
        with self._lock:
            self._counter += 1
            session_id = f"h-{self._counter:04d}"
            bridge = HumanBridgeSession(session_id)
            self._sessions[session_id] = bridge
        policy = replace(DEFAULT_POLICY, response_timeout=HUMAN_RESPONSE_TIMEOUT, max_agent_failures=99)
        config = SuiteConfig(
            suite_id="human-play",
            tasks=tuple(tasks or self._default_tasks),
            trials_per_task=1,
            mode=self._mode,
            policy=policy,
            camera=DEFAULT_CAMERA,
            agent_id=session_id,
            population="child",
        )
        out = None
        if self._out_dir is not None:
            out = self._out_dir / session_id
        thread = threading.Thread(target=self._play, args=(bridge, config, out), daemon=True)
        thread.start()
        return session_id

    def session(self, session_id: str) -> HumanBridgeSession | None:
        with self._lock:
            return self._sessions.get(session_id)

    def _play(self, bridge: HumanBridgeSession, config: SuiteConfig, out_dir) -> None:
        try:
            run_suite(config, session=bridge, out_dir=out_dir)
            bridge.send(Abort(session_id=bridge.session_id, seq=0, reason="session complete"))
        except Exception as exc:  # surface the reason to the client before closing
            logger.exception("human session %s failed", bridge.session_id)
            bridge.send(Abort(session_id=bridge.session_id, seq=0, reason=f"server error: {exc}"))
        finally:
            bridge.close()

    # exposed for handlers
    @property
    def static_dir(self) -> pathlib.Path | None:
        return self._static_dir


def _make_handler(server: HumanPlayServer):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # route through logging, not stderr
            logger.debug("http %s", fmt % args)

        def _json(self, code: int, payload: dict) -> None:
            body = json.dumps(payload).encode("utf-8")
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _read_body(self) -> dict:
            length = int(self.headers.get("Content-Length", "0") or "0")
            raw = self.rfile.read(length) if length else b"{}"
            try:
                data = json.loads(raw.decode("utf-8")) if raw else {}
            except (UnicodeDecodeError, json.JSONDecodeError):
                return {}
            return data if isinstance(data, dict) else {}

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_POST(self):
            parsed = urllib.parse.urlparse(self.path)
            parts = [p for p in parsed.path.split("/") if p]
            if parts == ["api", "session"]:
                body = self._read_body()
                tasks = body.get("tasks")
                if tasks is not None and (
                    not isinstance(tasks, list) or not all(isinstance(t, str) for t in tasks)
                ):
                    self._json(400, {"error": "tasks must be a list of task ids"})
                    return
                session_id = server.create_session(tuple(tasks) if tasks else None)
                self._json(200, {"session_id": session_id})
                return
            if len(parts) == 4 and parts[:2] == ["api", "session"] and parts[3] == "action":
                session = server.session(parts[2])
                if session is None:
                    self._json(404, {"error": "unknown session"})
                    return
                body = self._read_body()
                raw = body.get("raw_script_text")
                if not isinstance(raw, str):
                    self._json(400, {"error": "raw_script_text must be a string"})
                    return
                session.push_action(raw)
                self._json(200, {"ok": True})
                return
            self._json(404, {"error": "not found"})

        def do_GET(self):
            parsed = urllib.parse.urlparse(self.path)
            parts = [p for p in parsed.path.split("/") if p]
            if len(parts) == 4 and parts[:2] == ["api", "session"] and parts[3] == "messages":
                session = server.session(parts[2])
                if session is None:
                    self._json(404, {"error": "unknown session"})
                    return
                query = urllib.parse.parse_qs(parsed.query)
                try:
                    after = int(query.get("after", ["0"])[0])
                except ValueError:
                    self._json(400, {"error": "after must be an integer"})
                    return
                wait = min(LONG_POLL_SECONDS, float(query.get("wait", [str(LONG_POLL_SECONDS)])[0]))
                messages, closed = session.messages_after(after, wait)
                self._json(200, {"messages": messages, "next": after + len(messages), "closed": closed})
                return
            if parts[:1] == ["api"]:
                self._json(404, {"error": "not found"})
                return
            self._serve_static(parsed.path)

        def _serve_static(self, path: str) -> None:
            root = server.static_dir
            if root is None:
                self._json(404, {"error": "no static directory configured"})
                return
            rel = path.lstrip("/") or "index.html"
            target = (root / rel).resolve()
            if root not in target.parents and target != root:
                self._json(404, {"error": "not found"})
                return
            if target.is_dir():
                target = target / "index.html"
            if not target.is_file():
                self._json(404, {"error": "not found"})
                return
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            body = target.read_bytes()
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler
