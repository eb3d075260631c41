"""REST service: joint parsing plus an opt-in lexicon hot-swap endpoint.

Handlers are pure functions of an immutable snapshot (lexicon + analysis
fallback table) read once per request, so concurrent requests are safe
and a lexicon swap is a single reference assignment: in-flight requests
finish on the snapshot they started with, later ones see the new value.
"""
from __future__ import annotations

import json
import logging
import threading
import uuid
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from jointparse.conll_io import (
    format_conll,
    format_lattices,
    format_paths,
    rows_from_parse,
)
from jointparse.core import DEFAULT_TAGSET, Tagset
from jointparse.decode import beam_decode
from jointparse.features import Model
from jointparse.lexicon import (
    EMPTY_OOV,
    Lexicon,
    LexiconFormatError,
    OovTable,
    add_lexicon_entries,
    build_lattice,
    oov_token_indices,
    tokenize_raw,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Snapshot:
    """Everything a request reads; replaced whole, never mutated."""
    lexicon: Lexicon
    oov: OovTable


class RequestError(Exception):
    def __init__(self, status: int, message: str) -> None:
        super().__init__(message)
        self.status = status


async def _request_tokens(request: Request) -> list[str]:
    """Extract the sentence tokens from a ParseRequest body."""
    body = await request.body()
    try:
        payload = json.loads(body) if body else None
    except ValueError:
        raise RequestError(400, "request body is not valid JSON") from None
    if not isinstance(payload, dict):
        raise RequestError(400, "request body must be a JSON object")
    has_text = "text" in payload and payload["text"] is not None
    has_tokens = "tokens" in payload and payload["tokens"] is not None
    if has_text == has_tokens:
        raise RequestError(
            400, "provide exactly one of 'text' and 'tokens'")
    if has_text:
        if not isinstance(payload["text"], str):
            raise RequestError(400, "'text' must be a string")
        tokens = tokenize_raw(payload["text"])
    else:
        tokens = payload["tokens"]
        if (not isinstance(tokens, list)
                or any(not isinstance(t, str) for t in tokens)):
            raise RequestError(400, "'tokens' must be a list of strings")
        if any(not t or t.split() != [t] for t in tokens):
            raise RequestError(
                400, "tokens must be non-empty and contain no whitespace")
    if not tokens:
        raise RequestError(422, "the sentence is empty")
    return tokens


def _error_response(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse({"error": message, **extra}, status_code=status)


def create_app(model: Model, lexicon: Lexicon, oov: OovTable = EMPTY_OOV,
               tagset: Tagset = DEFAULT_TAGSET,
               admin_enabled: bool = False) -> FastAPI:
    app = FastAPI(title="jointparse", docs_url=None, redoc_url=None)
    # The browser front end is a static page on its own origin.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.model = model
    app.state.snapshot = Snapshot(lexicon=lexicon, oov=oov)
    app.state.tagset = tagset
    app.state.admin_enabled = admin_enabled
    app.state.swap_lock = threading.Lock()

    @app.exception_handler(Exception)
    async def on_unhandled(request: Request, exc: Exception) -> JSONResponse:
        incident = uuid.uuid4().hex[:12]
        log.exception("request %s %s failed [incident %s]",
                      request.method, request.url.path, incident)
        return _error_response(500, "internal error", incident=incident)

    @app.get("/healthz")
    async def healthz() -> PlainTextResponse:
        return PlainTextResponse("ok")

    @app.api_route("/yap/heb/joint", methods=["GET", "POST"])
    async def joint(request: Request) -> JSONResponse:
        try:
            tokens = await _request_tokens(request)
        except RequestError as err:
            return _error_response(err.status, str(err))
        snapshot: Snapshot = app.state.snapshot
        lattice = build_lattice(snapshot.lexicon, snapshot.oov, tokens)
        path, tree, _ = beam_decode(app.state.model, lattice)[0]
        return JSONResponse({
            "ma_lattice": format_lattices([lattice]),
            "md_lattice": format_paths([path]),
            "dep_tree": format_conll([rows_from_parse(path, tree)]),
        })

    @app.post("/yap/heb/lattice")
    async def ma_only(request: Request) -> JSONResponse:
        try:
            tokens = await _request_tokens(request)
        except RequestError as err:
            return _error_response(err.status, str(err))
        snapshot: Snapshot = app.state.snapshot
        lattice = build_lattice(snapshot.lexicon, snapshot.oov, tokens)
        return JSONResponse({
            "ma_lattice": format_lattices([lattice]),
            "oov": oov_token_indices(snapshot.lexicon, tokens),
        })

    @app.post("/admin/lexicon")
    async def admin_lexicon(request: Request) -> JSONResponse:
        if not app.state.admin_enabled:
            return _error_response(404, "admin endpoint is disabled")
        body = await request.body()
        try:
            payload = json.loads(body) if body else None
        except ValueError:
            return _error_response(400, "request body is not valid JSON")
        if (not isinstance(payload, dict)
                or not isinstance(payload.get("lines"), list)
                or any(not isinstance(l, str) for l in payload["lines"])):
            return _error_response(
                400, "body must be {\"lines\": [string, ...]}")
        lines = payload["lines"]
        # Hold the lock across parse+swap so concurrent batches cannot
        # lose each other's entries; requests read app.state.snapshot
        # without the lock and stay on their value until they finish.
        with app.state.swap_lock:
            snapshot: Snapshot = app.state.snapshot
            diagnostics = _batch_diagnostics(lines, app.state.tagset)
            if diagnostics:
                return _error_response(400, "lexicon batch rejected",
                                       lines=diagnostics)
            try:
                merged, added, _ = add_lexicon_entries(
                    snapshot.lexicon, lines, app.state.tagset)
            except LexiconFormatError as err:
                return _error_response(400, "lexicon batch rejected",
                                       lines=[{"line": 0,
                                               "error": str(err)}])
            app.state.snapshot = Snapshot(lexicon=merged, oov=snapshot.oov)
        return JSONResponse({"added": added})

    return app


def _batch_diagnostics(lines: list[str],
                       tagset: Tagset) -> list[dict[str, object]]:
    """Per-line parse errors, so one bad batch reports every problem."""
    from jointparse.lexicon import parse_lexicon_text
    problems = []
    for number, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            parse_lexicon_text(line, tagset, "line")
        except LexiconFormatError as err:
            problems.append({"line": number, "error": str(err)})
    return problems


def serve(model: Model, lexicon: Lexicon, oov: OovTable = EMPTY_OOV,
          tagset: Tagset = DEFAULT_TAGSET, port: int = 8000,
          admin_enabled: bool = False) -> None:
    """Run the server on localhost; blocks until terminated."""
    import uvicorn

    app = create_app(model, lexicon, oov=oov, tagset=tagset,
                     admin_enabled=admin_enabled)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
