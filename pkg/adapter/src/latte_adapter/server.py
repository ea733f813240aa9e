"""FastAPI app implementing the backend wire protocol.

Request bodies are parsed by hand so every malformed input maps to the
protocol's error shape (`{"error": {"type", "message"}}`, HTTP 400)
rather than framework-default validation payloads. Engine calls are
serialized with a lock: one model instance, one request at a time, with
queueing at the server boundary.
"""

from __future__ import annotations

import base64
import io
import threading

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from PIL import Image
from starlette.exceptions import HTTPException as StarletteHTTPException

from .engines import RoleEngines


class ProtocolViolation(Exception):
    pass


def _error(status: int, kind: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"type": kind, "message": message}}
    )


def _decode_image(body: dict) -> np.ndarray:
    payload = body.get("image_png_base64")
    if not isinstance(payload, str):
        raise ProtocolViolation("request requires image_png_base64")
    try:
        raw = base64.b64decode(payload, validate=True)
        with Image.open(io.BytesIO(raw)) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except ProtocolViolation:
        raise
    except Exception as exc:
        raise ProtocolViolation(f"image_png_base64 is not a decodable PNG: {exc}") from exc


def _token_list(body: dict, field: str) -> list[str]:
    tokens = body.get(field)
    if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
        raise ProtocolViolation(f"request requires a {field} list of strings")
    return tokens


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception as exc:
        raise ProtocolViolation(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(body, dict):
        raise ProtocolViolation("request body must be a JSON object")
    return body


def create_app(engines: RoleEngines) -> FastAPI:
    app = FastAPI(title="latte-model-adapter", docs_url=None, redoc_url=None)
    inference_lock = threading.Lock()

    @app.exception_handler(ProtocolViolation)
    async def on_protocol_violation(_request, exc: ProtocolViolation):
        return _error(400, "protocol", str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(_request, exc: StarletteHTTPException):
        return _error(exc.status_code, "protocol", str(exc.detail))

    @app.exception_handler(Exception)
    async def on_engine_error(_request, exc: Exception):
        return _error(500, "model", f"{type(exc).__name__}: {exc}")

    def require(role: str):
        engine = getattr(engines, role)
        if engine is None:
            raise ProtocolViolation(f"role {role!r} is not configured on this adapter")
        return engine

    @app.post("/v1/generate")
    async def generate(request: Request):
        body = await _json_body(request)
        image = _decode_image(body)
        engine = require("generate")
        with inference_lock:
            latex = engine.generate(image)
        return {"latex": str(latex)}

    @app.post("/v1/localize")
    async def localize(request: Request):
        body = await _json_body(request)
        image = _decode_image(body)
        tokens = _token_list(body, "tokens")
        engine = require("localize")
        with inference_lock:
            raw_index = engine.localize(image, tokens)
        # Contract: the served index always lands in [0, len(tokens)].
        index = max(0, min(len(tokens), int(raw_index)))
        return {"index": index}

    @app.post("/v1/refine")
    async def refine(request: Request):
        body = await _json_body(request)
        image = _decode_image(body)
        prompt_tokens = _token_list(body, "prompt_tokens")
        engine = require("refine")
        with inference_lock:
            completion = engine.refine(image, prompt_tokens)
        return {"completion_tokens": [str(t) for t in completion]}

    @app.get("/healthz")
    async def healthz():
        roles = [r for r in ("generate", "localize", "refine") if getattr(engines, r)]
        return {"status": "ok", "roles": roles}

    return app
