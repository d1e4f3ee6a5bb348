"""HTTP front end: JSON API under /api, static assets everywhere else.

    POST /api/axioms   {"op": "insert"|"remove", "axiom": "..."}
                       202-style ack as {"queued": true} once the entry
                       is durably enqueued; 400 carries line/column for
                       bad syntax, 503 when the queue is bounded and full.
    POST /api/query    {"goal": "...", "limit": n} -> {"results": [...]}
                       each result maps variable names to term json;
                       400 for syntax or unindexed queries, 422 when the
                       step budget runs out.
    POST /api/quiesce  {"ticks": n}
    GET  /api/stats    queue length, tick count, io counter, dead letters

A background worker drains the queue continuously; quiesce is for tests
and scripts that need a barrier.  Static files are served from an asset
directory with path traversal refused.
"""

from __future__ import annotations

import json
import mimetypes
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .lang import LangError, parse_axiom, parse_dgoal
from .query import UnindexedQuery, query
from .static_engine import BudgetExhausted, EngineError
from .storage import QueueFull
from .tank import NotQuiescent, Tank
from .terms import term_to_json

MAX_BODY = 1 << 20


class TickWorker(threading.Thread):
    def __init__(self, tank: Tank, interval: float = 0.002):
        super().__init__(daemon=True, name="tick-worker")
        self.tank = tank
        self.interval = interval
        # Thread itself has a private _stop method; don't shadow it
        self._halt = threading.Event()

    def run(self) -> None:
        while not self._halt.is_set():
            if self.tank.queue_length() > 0:
                self.tank.tick()
            else:
                self._halt.wait(self.interval)

    def stop(self) -> None:
        self._halt.set()


class FishtankServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, addr, tank: Tank, assets_dir: Optional[str] = None):
        super().__init__(addr, Handler)
        self.tank = tank
        self.assets_dir = os.path.realpath(assets_dir) if assets_dir else None


class Handler(BaseHTTPRequestHandler):
    server: FishtankServer

    def log_message(self, fmt, *args):  # keep test output clean
        pass

    # -- plumbing -----------------------------------------------------------

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> Optional[dict]:
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            length = 0
        if length <= 0 or length > MAX_BODY:
            self._send_json(400, {"error": "missing or oversized body"})
            return None
        try:
            obj = json.loads(self.rfile.read(length).decode("utf-8"))
        except (ValueError, UnicodeDecodeError, RecursionError):
            self._send_json(400, {"error": "body is not valid json"})
            return None
        if not isinstance(obj, dict):
            self._send_json(400, {"error": "body must be a json object"})
            return None
        return obj

    # -- routes ---------------------------------------------------------------

    def do_POST(self) -> None:
        if self.path == "/api/axioms":
            self._post_axioms()
        elif self.path == "/api/query":
            self._post_query()
        elif self.path == "/api/quiesce":
            self._post_quiesce()
        else:
            self._send_json(404, {"error": "no such endpoint"})

    def do_GET(self) -> None:
        path = self.path.split("?", 1)[0]
        if path == "/api/stats":
            self._send_json(200, self.server.tank.stats())
        elif path.startswith("/api/"):
            self._send_json(404, {"error": "no such endpoint"})
        else:
            self._get_static(path)

    def _post_axioms(self) -> None:
        body = self._read_json()
        if body is None:
            return
        op = body.get("op")
        text = body.get("axiom")
        if op not in ("insert", "remove") or not isinstance(text, str):
            self._send_json(400, {"error": "need op insert|remove and an axiom string"})
            return
        tank = self.server.tank
        try:
            axiom = parse_axiom(text, tank.decls)
        except LangError as exc:
            self._send_json(400, {"error": exc.message,
                                  "line": exc.line, "column": exc.col})
            return
        except RecursionError:
            self._send_json(400, {"error": "axiom is too deeply nested"})
            return
        try:
            if op == "insert":
                tank.insert(axiom)
            else:
                tank.remove(axiom)
        except QueueFull:
            self._send_json(503, {"error": "work queue is full"})
            return
        self._send_json(200, {"queued": True})

    def _post_query(self) -> None:
        body = self._read_json()
        if body is None:
            return
        text = body.get("goal")
        limit = body.get("limit", 100)
        if not isinstance(text, str):
            self._send_json(400, {"error": "need a goal string"})
            return
        if not isinstance(limit, int) or limit < 1:
            self._send_json(400, {"error": "limit must be a positive integer"})
            return
        tank = self.server.tank
        try:
            goal = parse_dgoal(text, tank.decls)
        except LangError as exc:
            self._send_json(400, {"error": exc.message,
                                  "line": exc.line, "column": exc.col})
            return
        except RecursionError:
            self._send_json(400, {"error": "goal is too deeply nested"})
            return
        try:
            results = query(goal, tank, limit=limit)
        except UnindexedQuery as exc:
            self._send_json(400, {"error": str(exc)})
            return
        except BudgetExhausted as exc:
            self._send_json(422, {"error": str(exc)})
            return
        except EngineError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        self._send_json(200, {"results": [
            {var: term_to_json(term) for var, term in result.items()}
            for result in results]})

    def _post_quiesce(self) -> None:
        tank = self.server.tank
        try:
            ticks = tank.quiesce()
        except NotQuiescent as exc:
            self._send_json(503, {"error": "not quiescent", "ticks": exc.ticks})
            return
        self._send_json(200, {"ticks": ticks})

    # -- static assets ----------------------------------------------------------

    def _get_static(self, path: str) -> None:
        base = self.server.assets_dir
        if base is None:
            self._send_json(404, {"error": "no asset directory configured"})
            return
        rel = path.lstrip("/") or "index.html"
        target = os.path.realpath(os.path.join(base, rel))
        if target != base and not target.startswith(base + os.sep):
            self._send_json(403, {"error": "path escapes asset directory"})
            return
        if os.path.isdir(target):
            target = os.path.join(target, "index.html")
        if not os.path.isfile(target):
            self._send_json(404, {"error": "no such file"})
            return
        ctype = mimetypes.guess_type(target)[0] or "application/octet-stream"
        with open(target, "rb") as f:
            data = f.read()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


def make_server(tank: Tank, port: int = 0, assets_dir: Optional[str] = None,
                host: str = "127.0.0.1") -> FishtankServer:
    return FishtankServer((host, port), tank, assets_dir)


def serve(tank: Tank, port: int, assets_dir: Optional[str] = None,
          host: str = "127.0.0.1") -> None:
    """Run the server and the tick worker until interrupted."""
    server = make_server(tank, port, assets_dir, host)
    worker = TickWorker(tank)
    worker.start()
    try:
        server.serve_forever()
    finally:
        worker.stop()
        server.server_close()
