"""Threaded JSON-over-HTTP query service.

The engine state (knowledge base + encoder parameters) is immutable once
loaded, so requests are served concurrently without locks. Response bodies
are a pure function of the request when timing is disabled, which makes
concurrent and serial replays byte-identical.

Routes:
    GET  /health  -> {"status": "ok", "entries": N}
    POST /query   -> body {"question": str, "k"?: int, "n"?: int, "timing"?: bool}
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from . import kb as kb_module
from .encoder import EncoderParams, load_static_embeddings
from .errors import FaqMatchError
from .kb import KnowledgeBase
from .pipeline import answer

log = logging.getLogger(__name__)


@dataclass
class Engine:
    """Loaded, read-only state shared by all request threads."""

    kb: KnowledgeBase
    params: EncoderParams
    default_k: int = 32
    default_n: int = 3

    @classmethod
    def load(cls, index_path: str, params_path: str, k: int = 32, n: int = 3) -> "Engine":
        return cls(
            kb=kb_module.load(index_path),
            params=load_static_embeddings(params_path),
            default_k=k,
            default_n=n,
        )

    def answer_payload(self, question: str, k: int | None, n: int | None, timing: bool) -> dict:
        result = answer(self.kb, question, self.params, k or self.default_k, n or self.default_n)
        entry = self.kb.entry_by_id(result.match.matched_id)
        payload = {
            "matched_faq": {
                "id": result.match.matched_id,
                "question": entry.question.text,
                "score": result.match.matched_score,
            },
            "answers": [
                {"index": s.index, "text": s.text, "score": s.score}
                for s in result.selection.selected
            ],
        }
        if timing:
            payload["timing_ms"] = {
                "match": result.timing_ms["match"],
                "select": result.timing_ms["select"],
                "total": result.timing_ms["total"],
            }
        return payload


def _encode_body(payload: dict) -> bytes:
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


class EngineServer(ThreadingHTTPServer):
    """HTTP server whose engine slot may be filled after binding.

    While ``engine`` is None (index still loading) every request gets 503.
    """

    daemon_threads = True
    request_queue_size = 128  # default backlog of 5 drops concurrent bursts

    def __init__(self, address: tuple[str, int], engine: Engine | None):
        super().__init__(address, _Handler)
        self.engine = engine

    @property
    def port(self) -> int:
        return self.server_address[1]


class _Handler(BaseHTTPRequestHandler):
    server: EngineServer

    def log_message(self, format: str, *args) -> None:  # noqa: A002 - stdlib signature
        log.debug("%s - %s", self.address_string(), format % args)

    def _respond(self, status: int, payload: dict) -> None:
        body = _encode_body(payload)
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:  # noqa: N802 - stdlib naming
        if self.path != "/health":
            self._respond(404, {"error": "not found"})
            return
        engine = self.server.engine
        if engine is None:
            self._respond(503, {"error": "index loading"})
            return
        self._respond(200, {"status": "ok", "entries": len(engine.kb)})

    def do_POST(self) -> None:  # noqa: N802 - stdlib naming
        if self.path != "/query":
            self._respond(404, {"error": "not found"})
            return
        engine = self.server.engine
        if engine is None:
            self._respond(503, {"error": "index loading"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            request = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            self._respond(400, {"error": f"invalid JSON body: {exc}"})
            return
        error = _validate_query(request)
        if error:
            self._respond(400, {"error": error})
            return
        try:
            payload = engine.answer_payload(
                request["question"],
                request.get("k"),
                request.get("n"),
                bool(request.get("timing", True)),
            )
        except FaqMatchError as exc:
            self._respond(400, {"error": str(exc)})
            return
        self._respond(200, payload)


def _validate_query(request) -> str | None:
    if not isinstance(request, dict):
        return "body must be a JSON object"
    question = request.get("question")
    if not isinstance(question, str) or not question.strip():
        return "field 'question' must be a non-empty string"
    for name in ("k", "n"):
        value = request.get(name)
        if value is not None and (not isinstance(value, int) or isinstance(value, bool) or value < 1):
            return f"field '{name}' must be a positive integer"
    timing = request.get("timing")
    if timing is not None and not isinstance(timing, bool):
        return "field 'timing' must be a boolean"
    return None


def make_server(engine: Engine | None, port: int = 0, host: str = "127.0.0.1") -> EngineServer:
    """Bind a server; port 0 picks a free port (see ``server.port``)."""
    return EngineServer((host, port), engine)


def serve(index_path: str, params_path: str, port: int, k: int = 32, n: int = 3) -> None:
    """Bind immediately and load the index in the background.

    Requests arriving before the load finishes receive 503.
    """
    server = make_server(None, port=port)
    load_error: list[Exception] = []

    def _load() -> None:
        try:
            server.engine = Engine.load(index_path, params_path, k=k, n=n)
        except Exception as exc:  # surface in the main thread
            load_error.append(exc)
            server.shutdown()
            return
        log.info("engine loaded: %d entries", len(server.engine.kb))

    loader = threading.Thread(target=_load, daemon=True)
    loader.start()
    log.info("serving on port %d", server.port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    if load_error:
        raise load_error[0]
