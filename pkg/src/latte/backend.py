"""Protocol to the three model roles: generate, localize, refine.

Everything learned lives behind this boundary. The wire format is JSON
over HTTP:

    POST /v1/generate  {"image_png_base64": str}                      -> {"latex": str}
    POST /v1/localize  {"image_png_base64": str, "tokens": [str]}     -> {"index": int}
    POST /v1/refine    {"image_png_base64": str, "prompt_tokens": [str]}
                                                                      -> {"completion_tokens": [str]}

Errors are `{"error": {"type": str, "message": str}}` with HTTP 400 for
protocol violations and 500 for backend-reported model errors (type
"unscripted" for a mock miss). This module provides the client, a
deterministic fixture-driven mock, a small HTTP server wrapping any
backend, and a reference implementation of the fault-localization
attention head.
"""

from __future__ import annotations

import base64
import enum
import hashlib
import io
import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Protocol

import numpy as np
import requests
from PIL import Image

from .raster import PixelGrid


class BackendError(Exception):
    """Base of all backend failures."""


class TransportError(BackendError):
    """The backend could not be reached."""


class ProtocolError(BackendError):
    """A message violated the wire contract."""


class ModelError(BackendError):
    """The backend reported a model-side failure."""


class UnscriptedRequestError(ModelError):
    """The mock received a request its fixture does not script."""


class FixtureError(ValueError):
    """The mock fixture file is malformed."""


class Role(enum.Enum):
    GENERATE = "generate"
    LOCALIZE = "localize"
    REFINE = "refine"


@dataclass(frozen=True)
class BackendRequest:
    role: Role
    image: PixelGrid
    tokens: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.role is Role.GENERATE and self.tokens is not None:
            raise ValueError("generate requests carry no tokens")
        if self.role in (Role.LOCALIZE, Role.REFINE) and self.tokens is None:
            raise ValueError(f"{self.role.value} requests require tokens")


@dataclass(frozen=True)
class BackendResponse:
    role: Role
    latex: str | None = None
    index: int | None = None
    completion_tokens: tuple[str, ...] | None = None


def image_key(image: PixelGrid) -> str:
    """Canonical image hash used by fixtures: sha256 over
    ``b"{height}x{width}:"`` plus the raw row-major RGB bytes."""
    header = f"{image.height}x{image.width}:".encode("ascii")
    return hashlib.sha256(header + image.array.tobytes()).hexdigest()


def encode_image(image: PixelGrid) -> str:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(image.array), mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def decode_image(payload: str) -> PixelGrid:
    try:
        raw = base64.b64decode(payload, validate=True)
        with Image.open(io.BytesIO(raw)) as img:
            return PixelGrid(np.asarray(img.convert("RGB"), dtype=np.uint8))
    except Exception as exc:
        raise ProtocolError(f"image_png_base64 is not a decodable PNG: {exc}") from exc


_ENDPOINTS = {
    Role.GENERATE: "/v1/generate",
    Role.LOCALIZE: "/v1/localize",
    Role.REFINE: "/v1/refine",
}


def serialize_request(request: BackendRequest) -> tuple[str, dict]:
    """(endpoint path, JSON body) for a request."""
    body: dict = {"image_png_base64": encode_image(request.image)}
    if request.role is Role.LOCALIZE:
        body["tokens"] = list(request.tokens)
    elif request.role is Role.REFINE:
        body["prompt_tokens"] = list(request.tokens)
    return _ENDPOINTS[request.role], body


def parse_request(path: str, body: dict) -> BackendRequest:
    roles = {v: k for k, v in _ENDPOINTS.items()}
    if path not in roles:
        raise ProtocolError(f"unknown endpoint {path!r}")
    role = roles[path]
    if not isinstance(body, dict) or "image_png_base64" not in body:
        raise ProtocolError("request body must be a JSON object with image_png_base64")
    image = decode_image(body["image_png_base64"])
    tokens = None
    if role is Role.LOCALIZE:
        tokens = body.get("tokens")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise ProtocolError("localize requires a tokens list of strings")
    elif role is Role.REFINE:
        tokens = body.get("prompt_tokens")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise ProtocolError("refine requires a prompt_tokens list of strings")
    return BackendRequest(role=role, image=image, tokens=None if tokens is None else tuple(tokens))


def serialize_response(response: BackendResponse) -> dict:
    if response.role is Role.GENERATE:
        return {"latex": response.latex}
    if response.role is Role.LOCALIZE:
        return {"index": response.index}
    return {"completion_tokens": list(response.completion_tokens)}


def parse_response(role: Role, body: dict) -> BackendResponse:
    if not isinstance(body, dict):
        raise ProtocolError("response body must be a JSON object")
    if role is Role.GENERATE:
        latex = body.get("latex")
        if not isinstance(latex, str):
            raise ProtocolError("generate response requires a string 'latex'")
        return BackendResponse(role=role, latex=latex)
    if role is Role.LOCALIZE:
        index = body.get("index")
        if not isinstance(index, int) or isinstance(index, bool):
            raise ProtocolError("localize response requires an integer 'index'")
        return BackendResponse(role=role, index=index)
    completion = body.get("completion_tokens")
    if not isinstance(completion, list) or not all(isinstance(t, str) for t in completion):
        raise ProtocolError("refine response requires a 'completion_tokens' list of strings")
    return BackendResponse(role=role, completion_tokens=tuple(completion))


class Backend(Protocol):
    def call(self, request: BackendRequest) -> BackendResponse: ...

    def generate(self, image: PixelGrid) -> str: ...

    def localize(self, image: PixelGrid, tokens: list[str]) -> int: ...

    def refine(self, image: PixelGrid, prompt_tokens: list[str]) -> list[str]: ...


class _RoleMethodsMixin:
    """Convenience role methods over ``call``, with response validation."""

    def generate(self, image: PixelGrid) -> str:
        return self.call(BackendRequest(role=Role.GENERATE, image=image)).latex

    def localize(self, image: PixelGrid, tokens: list[str]) -> int:
        response = self.call(
            BackendRequest(role=Role.LOCALIZE, image=image, tokens=tuple(tokens))
        )
        if not 0 <= response.index <= len(tokens):
            raise ProtocolError(
                f"localize index {response.index} outside [0, {len(tokens)}]"
            )
        return response.index

    def refine(self, image: PixelGrid, prompt_tokens: list[str]) -> list[str]:
        response = self.call(
            BackendRequest(role=Role.REFINE, image=image, tokens=tuple(prompt_tokens))
        )
        return list(response.completion_tokens)


class MockBackend(_RoleMethodsMixin):
    """Deterministic scripted backend.

    The fixture is JSONL; each line is
    ``{"role": str, "match": int | str, "response": {...}}`` where an
    integer match is a 0-based per-role request sequence number and a
    string match is the canonical image hash from ``image_key``.
    ``"response": {"error": msg}`` scripts a model-side failure. Hash
    matches take precedence over sequence matches and are not consumed,
    so identical request streams always produce identical responses.
    """

    def __init__(self, rows: list[dict]):
        self._by_hash: dict[tuple[str, str], dict] = {}
        self._by_seq: dict[tuple[str, int], dict] = {}
        self._counters = {role: 0 for role in Role}
        self._lock = threading.Lock()
        self.calls: list[Role] = []
        for lineno, row in enumerate(rows, start=1):
            self._add_row(row, lineno)

    def _add_row(self, row: dict, lineno: int) -> None:
        if not isinstance(row, dict):
            raise FixtureError(f"line {lineno}: fixture rows must be objects")
        try:
            role = Role(row["role"])
        except (KeyError, ValueError):
            raise FixtureError(f"line {lineno}: missing or unknown role") from None
        match = row.get("match")
        response = row.get("response")
        if not isinstance(response, dict):
            raise FixtureError(f"line {lineno}: 'response' must be an object")
        if isinstance(match, bool) or not isinstance(match, (int, str)):
            raise FixtureError(f"line {lineno}: 'match' must be an int or image-hash string")
        table = self._by_seq if isinstance(match, int) else self._by_hash
        key = (role.value, match)
        if key in table:
            raise FixtureError(f"line {lineno}: duplicate fixture key {key}")
        table[key] = response

    @classmethod
    def from_file(cls, path: str | Path) -> "MockBackend":
        rows = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise FixtureError(f"line {lineno}: invalid JSON: {exc}") from exc
        return cls(rows)

    def call(self, request: BackendRequest) -> BackendResponse:
        with self._lock:
            self.calls.append(request.role)
            seq = self._counters[request.role]
            self._counters[request.role] += 1
            key_hash = (request.role.value, image_key(request.image))
            scripted = self._by_hash.get(key_hash, self._by_seq.get((request.role.value, seq)))
        if scripted is None:
            raise UnscriptedRequestError(
                f"unscripted request: role={request.role.value} seq={seq} hash={key_hash[1][:12]}..."
            )
        if "error" in scripted:
            raise ModelError(str(scripted["error"]))
        return parse_response(request.role, scripted)

    def call_counts(self) -> dict[str, int]:
        return {role.value: self.calls.count(role) for role in Role}


class HttpBackend(_RoleMethodsMixin):
    """Client for any server speaking the wire protocol."""

    def __init__(self, base_url: str, timeout_s: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s

    def call(self, request: BackendRequest) -> BackendResponse:
        path, body = serialize_request(request)
        try:
            http_response = requests.post(
                self.base_url + path, json=body, timeout=self.timeout_s
            )
        except requests.RequestException as exc:
            raise TransportError(f"backend unreachable: {exc}") from exc
        try:
            payload = http_response.json()
        except ValueError as exc:
            raise ProtocolError(f"non-JSON response (HTTP {http_response.status_code})") from exc
        if http_response.status_code != 200:
            err = payload.get("error") if isinstance(payload, dict) else None
            if not isinstance(err, dict) or "message" not in err:
                raise ProtocolError(f"malformed error response (HTTP {http_response.status_code})")
            if http_response.status_code == 400:
                raise ProtocolError(err["message"])
            raise ModelError(err["message"])
        return parse_response(request.role, payload)


def _error_body(kind: str, message: str) -> bytes:
    return json.dumps({"error": {"type": kind, "message": message}}).encode("utf-8")


class _BackendHTTPHandler(BaseHTTPRequestHandler):
    backend: Backend  # set on the subclass by make_server

    def log_message(self, *args):  # quiet by default
        pass

    def _send(self, status: int, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._send(400, _error_body("protocol", "request body is not valid JSON"))
            return
        try:
            request = parse_request(self.path, body)
        except ProtocolError as exc:
            if f"unknown endpoint {self.path!r}" in str(exc):
                self._send(404, _error_body("protocol", str(exc)))
            else:
                self._send(400, _error_body("protocol", str(exc)))
            return
        try:
            response = self.backend.call(request)
        except UnscriptedRequestError as exc:
            self._send(500, _error_body("unscripted", str(exc)))
            return
        except ProtocolError as exc:
            self._send(400, _error_body("protocol", str(exc)))
            return
        except BackendError as exc:
            self._send(500, _error_body("model", str(exc)))
            return
        self._send(200, json.dumps(serialize_response(response)).encode("utf-8"))


def make_server(backend: Backend, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """HTTP server exposing ``backend`` on the wire protocol. ``port=0``
    picks a free port (see ``server.server_address``)."""
    handler = type("BoundHandler", (_BackendHTTPHandler,), {"backend": backend})
    return ThreadingHTTPServer((host, port), handler)


def serve(backend: Backend, host: str = "127.0.0.1", port: int = 8041) -> None:
    """Run the server until interrupted."""
    server = make_server(backend, host, port)
    try:
        server.serve_forever()
    finally:
        server.server_close()


@dataclass(frozen=True)
class AttentionHead:
    """Trainable projections of the fault-localization head; both weight
    matrices are (d_out, d_hidden)."""

    w_q: np.ndarray
    w_k: np.ndarray

    def __post_init__(self):
        w_q = np.asarray(self.w_q, dtype=np.float64)
        w_k = np.asarray(self.w_k, dtype=np.float64)
        if w_q.ndim != 2 or w_q.shape != w_k.shape:
            raise ValueError(
                f"weight matrices must share (d_out, d_hidden), got {w_q.shape} and {w_k.shape}"
            )
        object.__setattr__(self, "w_q", w_q)
        object.__setattr__(self, "w_k", w_k)


def fl_head_forward(hidden_states: np.ndarray, head: AttentionHead) -> tuple[np.ndarray, int]:
    """Attention over token hidden states, queried by the final token.

    Q = ReLU(W_q h_n), K = ReLU(W_k H), P = softmax(Q K^T); returns P and
    the argmax index (lowest index on ties). The last hidden state is the
    query because it is the only one that has attended to the whole
    sequence.
    """
    h = np.asarray(hidden_states, dtype=np.float64)
    if h.ndim != 2 or h.shape[0] < 1:
        raise ValueError(f"hidden states must be (n, d_hidden) with n >= 1, got {h.shape}")
    if h.shape[1] != head.w_q.shape[1]:
        raise ValueError(
            f"hidden size mismatch: states have {h.shape[1]}, weights expect {head.w_q.shape[1]}"
        )
    q = np.maximum(head.w_q @ h[-1], 0.0)
    k = np.maximum(h @ head.w_k.T, 0.0)
    logits = k @ q
    shifted = logits - logits.max()
    weights = np.exp(shifted)
    p = weights / weights.sum()
    return p, int(np.argmax(p))
