"""Web-facing gateway: serves the frontend, publishes the schema, runs the
developer hooks and relays requests to the remote service over HTTP.

The pipeline for POST /ui/submit is fixed: validate the submission against
the input schema, run prepare_request, POST the result to the service's
/api/process, run process_response, return the DisplayItems. Hooks run here
in the gateway process so the browser bundle stays a pure schema renderer.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Callable, Sequence
from urllib.parse import unquote, urlsplit

import requests

from .codecs import CodecError, TensorPayload
from .schema import (File, Number, Plot, SchemaDescriptor, Text, UIType,
                     schema_to_wire, validate_input)
from .server import error_body

log = logging.getLogger("mlserve.gateway")


class UserInputError(ValueError):
    """Raised by hooks when a validated submission is still unusable
    (undecodable image, malformed CSV). Maps to a 422 at the gateway."""

    def __init__(self, message: str, field_name: str = ""):
        super().__init__(message)
        self.field_name = field_name


# display items ---------------------------------------------------------------

@dataclass(frozen=True)
class LineSeries:
    label: str
    x: tuple
    y: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ValueError(f"series {self.label!r}: {len(self.x)} x values vs {len(self.y)} y values")


@dataclass(frozen=True)
class PlotLine:
    title: str
    series: tuple[LineSeries, ...]

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))

    def to_wire(self) -> dict:
        return {"type": "PlotLine", "title": self.title,
                "series": [{"label": s.label, "x": list(s.x), "y": list(s.y)} for s in self.series]}


@dataclass(frozen=True)
class PlotImage:
    title: str
    image: TensorPayload

    def __post_init__(self):
        shape = self.image.shape
        if self.image.dtype != "u8":
            raise ValueError(f"plot image must be u8, got {self.image.dtype}")
        if not (len(shape) == 2 or (len(shape) == 3 and shape[2] == 3)):
            raise ValueError(f"plot image shape must be [H,W] or [H,W,3], got {list(shape)}")

    def to_wire(self) -> dict:
        return {"type": "PlotImage", "title": self.title, "image": self.image.to_wire()}


@dataclass(frozen=True)
class NumberDisplay:
    label: str
    value: float

    def to_wire(self) -> dict:
        return {"type": "NumberDisplay", "label": self.label, "value": float(self.value)}


@dataclass(frozen=True)
class FileDownload:
    filename: str
    content_base64: str
    mime: str = "application/octet-stream"

    def to_wire(self) -> dict:
        return {"type": "FileDownload", "filename": self.filename,
                "content_base64": self.content_base64, "mime": self.mime}


@dataclass(frozen=True)
class TextDisplay:
    label: str
    text: str

    def to_wire(self) -> dict:
        return {"type": "TextDisplay", "label": self.label, "text": self.text}


DisplayItem = PlotLine | PlotImage | NumberDisplay | FileDownload | TextDisplay


def variant_matches(item: DisplayItem, ui: UIType) -> bool:
    """One display item satisfies one output-schema slot."""
    if isinstance(ui, Plot):
        return isinstance(item, PlotLine) if ui.kind == "line" else isinstance(item, PlotImage)
    if isinstance(ui, Number):
        return isinstance(item, NumberDisplay)
    if isinstance(ui, File):
        return isinstance(item, FileDownload)
    if isinstance(ui, Text):
        return isinstance(item, TextDisplay)
    return False


@dataclass
class UIAppDefinition:
    """Everything the gateway needs to host one app."""

    descriptor: SchemaDescriptor
    service_url: str
    prepare_request: Callable[[dict], dict]
    process_response: Callable[[dict, dict], Sequence[DisplayItem]]
    relay_timeout_s: float = 300.0


# HTTP layer ------------------------------------------------------------------

class _GatewayHttpServer(ThreadingHTTPServer):
    daemon_threads = True
    block_on_close = False
    gateway: "GatewayServer"


class _GatewayHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: _GatewayHttpServer

    def log_message(self, fmt, *args):
        log.debug("%s %s", self.address_string(), fmt % args)

    def _reply(self, status: int, body: bytes, content_type: str = "application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _reply_error(self, status: int, code: str, message: str, detail: dict | None = None) -> None:
        self._reply(status, error_body(code, message, detail))

    def do_GET(self):
        gw = self.server.gateway
        path = unquote(urlsplit(self.path).path)
        if path == "/ui/schema":
            self._reply(200, json.dumps(gw.schema_wire).encode("utf-8"))
            return
        self._serve_static(path)

    def do_POST(self):
        if urlsplit(self.path).path != "/ui/submit":
            self._reply_error(404, "NOT_FOUND", f"no such endpoint: POST {self.path}")
            return
        try:
            length = int(self.headers.get("Content-Length", 0) or 0)
        except ValueError:
            self._reply_error(400, "BAD_REQUEST", "invalid Content-Length header")
            return
        body = self.rfile.read(length) if length else b""
        try:
            raw = json.loads(body)
        except (ValueError, UnicodeDecodeError):
            self._reply_error(400, "BAD_REQUEST", "request body is not valid JSON")
            return
        if not isinstance(raw, dict):
            self._reply_error(400, "BAD_REQUEST", "submission top level must be a JSON object")
            return
        status, payload = self.server.gateway.submit(raw)
        self._reply(status, json.dumps(payload).encode("utf-8"))

    def _serve_static(self, path: str) -> None:
        gw = self.server.gateway
        if gw.static_dir is None:
            self._reply_error(404, "NOT_FOUND", "no frontend bundle configured")
            return
        rel = path.lstrip("/") or "index.html"
        segments = rel.split("/")
        if any(seg in ("..", "") for seg in segments):
            self._reply_error(404, "NOT_FOUND", "not found")
            return
        target = Path(gw.static_dir).joinpath(*segments)
        if not target.is_file():
            self._reply_error(404, "NOT_FOUND", f"no such file: {path}")
            return
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._reply(200, target.read_bytes(), content_type=ctype)


class GatewayServer:
    """Stateless HTTP front for one UIAppDefinition."""

    def __init__(self, app: UIAppDefinition, host: str = "127.0.0.1", port: int = 8080,
                 static_dir: str | Path | None = None):
        self.app = app
        self.host = host
        self.bind_port = port
        self.static_dir = Path(static_dir) if static_dir is not None else None
        self.schema_wire = schema_to_wire(app.descriptor)
        self._httpd: _GatewayHttpServer | None = None
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        assert self._httpd is not None, "gateway not started"
        return self._httpd.server_address[1]

    def start(self) -> None:
        self._httpd = _GatewayHttpServer((self.host, self.bind_port), _GatewayHandler)
        self._httpd.gateway = self
        self._thread = threading.Thread(target=lambda: self._httpd.serve_forever(poll_interval=0.05), name="mlserve-gateway", daemon=True)
        self._thread.start()
        log.info("gateway for %s on http://%s:%d relaying to %s",
                 self.app.descriptor.app_name, self.host, self.port, self.app.service_url)

    def stop(self) -> None:
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    # pipeline -----------------------------------------------------------

    def submit(self, raw: dict) -> tuple[int, dict]:
        """Run the submit pipeline; returns (http_status, json_payload)."""
        app = self.app
        report = validate_input(app.descriptor.input_schema, raw)
        if not report.ok:
            return 422, {"error": {"code": "VALIDATION", "message": "input validation failed",
                                   "detail": report.to_wire()}}

        try:
            request = app.prepare_request(raw)
        except (UserInputError, CodecError) as exc:
            field_name = getattr(exc, "field_name", "")
            issue_code = getattr(exc, "code", "BAD_FILE")
            detail = {"ok": False, "issues": [{"field": field_name, "code": issue_code, "message": str(exc)}]}
            return 422, {"error": {"code": "VALIDATION", "message": str(exc), "detail": detail}}
        except Exception as exc:
            log.exception("prepare_request hook failed")
            return 500, {"error": {"code": "INTERNAL", "message": f"prepare_request failed: {exc}"}}

        url = app.service_url.rstrip("/") + "/api/process"
        try:
            upstream = requests.post(url, json=request, timeout=app.relay_timeout_s)
        except requests.exceptions.Timeout:
            return 504, {"error": {"code": "TIMEOUT", "message": f"service did not answer within {app.relay_timeout_s}s"}}
        except requests.exceptions.RequestException as exc:
            return 502, {"error": {"code": "UPSTREAM", "message": f"could not reach service at {url}: {exc}"}}

        try:
            upstream_json = upstream.json()
        except ValueError:
            upstream_json = None
        if upstream.status_code != 200 or not isinstance(upstream_json, dict):
            detail = {"status": upstream.status_code,
                      "body": upstream_json if upstream_json is not None else upstream.text[:2000]}
            return 502, {"error": {"code": "UPSTREAM",
                                   "message": f"service answered {upstream.status_code}", "detail": detail}}

        try:
            items = list(app.process_response(request, upstream_json))
        except Exception as exc:
            log.exception("process_response hook failed")
            return 500, {"error": {"code": "INTERNAL", "message": f"process_response failed: {exc}"}}

        slots = list(app.descriptor.output_schema)
        if len(items) != len(slots):
            return 500, {"error": {"code": "OUTPUT_SCHEMA_VIOLATION",
                                   "message": f"hook returned {len(items)} items, schema declares {len(slots)}"}}
        for i, ((slot_name, ui), item) in enumerate(zip(slots, items)):
            if not variant_matches(item, ui):
                return 500, {"error": {"code": "OUTPUT_SCHEMA_VIOLATION",
                                       "message": f"output {i} ({slot_name!r}) expects {type(ui).__name__}"
                                                  f"[{getattr(ui, 'kind', '')}], got {type(item).__name__}"}}
        return 200, {"outputs": [item.to_wire() for item in items]}
