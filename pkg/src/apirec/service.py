"""JSON-over-HTTP front for the recommendation engine.

POST /api/v1/recommend takes the declarations of the project under
development plus the active declaration and answers with ranked invocations
and snippet candidates; GET /api/v1/health reports corpus readiness. The
request forms a transient project that is never persisted into the corpus,
so the service is stateless across requests. CORS is permissive so a browser
playground can talk to it directly.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from .corpus import Corpus, CorpusError, Declaration, Project
from .engine import (
    DEFAULT_K,
    DEFAULT_M,
    DEFAULT_N,
    DEFAULT_SNIPPET_COUNT,
    recommend_apis,
    recommend_snippets,
)
from .similarity import top_k_projects

ACTIVE_PROJECT_ID = "(active)"


class BadRequest(ValueError):
    """Client-side request problem; maps to HTTP 400."""


@dataclass
class AppState:
    """Shared service state: the corpus slot and the engine defaults."""

    corpus: Corpus | None = None
    defaults: dict[str, int] = field(
        default_factory=lambda: {
            "k": DEFAULT_K,
            "M": DEFAULT_M,
            "N": DEFAULT_N,
            "snippet_count": DEFAULT_SNIPPET_COUNT,
        }
    )


def _positive_int(payload: dict, name: str, default: int) -> int:
    value = payload.get(name, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise BadRequest(f"'{name}' must be a positive integer")
    return value


def _declaration_from(obj: Any, what: str) -> Declaration:
    if not isinstance(obj, dict):
        raise BadRequest(f"{what} must be an object")
    name = obj.get("name")
    invocations = obj.get("invocations", [])
    if not isinstance(name, str) or not name:
        raise BadRequest(f"{what} needs a non-empty 'name'")
    if not isinstance(invocations, list) or any(
        not isinstance(s, str) or not s for s in invocations
    ):
        raise BadRequest(f"{what} 'invocations' must be a list of non-empty strings")
    return Declaration(name=name, invocations=tuple(invocations))


def parse_recommend_request(payload: Any) -> tuple[Project, Declaration, dict[str, int]]:
    """Validate a recommend payload into a transient project and parameters."""
    if not isinstance(payload, dict):
        raise BadRequest("request body must be a JSON object")
    if "active" not in payload:
        raise BadRequest("request must contain an 'active' declaration")
    active_decl = _declaration_from(payload["active"], "'active'")
    raw_context = payload.get("context_declarations", [])
    if not isinstance(raw_context, list):
        raise BadRequest("'context_declarations' must be a list")
    context = [
        _declaration_from(obj, f"context declaration {i}")
        for i, obj in enumerate(raw_context)
    ]
    names = [d.name for d in context]
    if active_decl.name in names:
        raise BadRequest("active declaration name collides with a context declaration")
    if len(set(names)) != len(names):
        raise BadRequest("context declaration names must be unique")
    params = {
        "k": _positive_int(payload, "k", DEFAULT_K),
        "M": _positive_int(payload, "M", DEFAULT_M),
        "N": _positive_int(payload, "N", DEFAULT_N),
        "snippet_count": _positive_int(payload, "snippet_count", DEFAULT_SNIPPET_COUNT),
    }
    try:
        project = Project(
            id=ACTIVE_PROJECT_ID,
            declarations=tuple(context) + (active_decl,),
        )
    except CorpusError as exc:
        raise BadRequest(str(exc)) from exc
    return project, active_decl, params


def run_query(corpus: Corpus, payload: Any) -> dict:
    """The full recommend pipeline; shared by the HTTP handler and the CLI."""
    project, active_decl, params = parse_recommend_request(payload)
    started = time.perf_counter()
    topsim_p = top_k_projects(corpus, project, params["k"])
    rec = recommend_apis(
        corpus,
        project,
        active_decl,
        params["k"],
        params["M"],
        params["N"],
        topsim_p=topsim_p,
    )
    snippets = recommend_snippets(
        corpus, rec, active_decl, topsim_p, s=params["snippet_count"]
    )
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return {
        "apis": [
            {"invocation": canonical, "score": score, "rank": rank}
            for rank, (canonical, score) in enumerate(rec.items, start=1)
        ],
        "snippets": [
            {
                "declaration": s.declaration_name,
                "project": s.project_id,
                "score": s.jaccard_score,
                "sequence": list(s.invocation_sequence),
                **({"body": s.body} if s.body is not None else {}),
            }
            for s in snippets
        ],
        "fallback_used": rec.fallback_used,
        "elapsed_ms": elapsed_ms,
    }


def handle_recommend(state: AppState, payload: Any) -> tuple[int, dict]:
    if state.corpus is None:
        return 503, {"error": "corpus not loaded"}
    try:
        return 200, run_query(state.corpus, payload)
    except BadRequest as exc:
        return 400, {"error": str(exc)}


def handle_health(state: AppState) -> tuple[int, dict]:
    if state.corpus is None:
        return 200, {"status": "loading"}
    corpus = state.corpus
    return 200, {
        "status": "ok",
        "corpus": {
            "projects": len(corpus),
            "declarations": corpus.declaration_total,
            "vocabulary": len(corpus.vocabulary),
        },
    }


class _Handler(BaseHTTPRequestHandler):
    server: "RecommendationServer"

    def _send(self, status: int, body: dict) -> None:
        data = json.dumps(body).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self._cors_headers()
        self.end_headers()
        self.wfile.write(data)

    def _cors_headers(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def do_OPTIONS(self) -> None:  # noqa: N802 (BaseHTTPRequestHandler contract)
        self.send_response(204)
        self._cors_headers()
        self.end_headers()

    def do_GET(self) -> None:  # noqa: N802
        if self.path == "/api/v1/health":
            self._send(*handle_health(self.server.state))
        else:
            self._send(404, {"error": "not found"})

    def do_POST(self) -> None:  # noqa: N802
        if self.path != "/api/v1/recommend":
            self._send(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length)
        try:
            payload = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._send(400, {"error": "request body is not valid JSON"})
            return
        self._send(*handle_recommend(self.server.state, payload))

    def log_message(self, fmt: str, *args: object) -> None:
        if self.server.verbose:
            super().log_message(fmt, *args)


class RecommendationServer(ThreadingHTTPServer):
    daemon_threads = True
    request_queue_size = 128  # survive request bursts from concurrent clients

    def __init__(self, address: tuple[str, int], state: AppState, verbose: bool = False):
        super().__init__(address, _Handler)
        self.state = state
        self.verbose = verbose


def serve(
    corpus: Corpus, host: str = "127.0.0.1", port: int = 8080, verbose: bool = True
) -> RecommendationServer:
    """Start a server thread for the given corpus; caller owns shutdown()."""
    state = AppState(corpus=corpus)
    server = RecommendationServer((host, port), state, verbose=verbose)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server
