"""HTTP server exposing a service's process function with bounded admission.

Endpoints are fixed: POST /api/process and GET /health. Process requests pass
through a pool of `workers` threads fed by a FIFO queue of `queue_capacity`
waiting slots; anything beyond that is answered 503 immediately. Health checks
never enter the pool, so they keep answering while all workers are busy.
Every non-200 body is the error envelope {"error": {"code", "message"}}.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
from concurrent.futures import Future
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .service import BAD_REQUEST, INTERNAL, UNPROCESSABLE, Service, ServiceError

log = logging.getLogger("mlserve.server")

_STATUS_FOR_CODE = {BAD_REQUEST: 400, UNPROCESSABLE: 422, INTERNAL: 500}


@dataclass(frozen=True)
class ServerConfig:
    bind_host: str = "127.0.0.1"
    bind_port: int = 8000
    workers: int = 1
    queue_capacity: int = 32
    max_body_bytes: int = 64 * 1024 * 1024
    request_timeout_s: float = 300.0

    def __post_init__(self):
        if not 1 <= self.bind_port <= 65535:
            raise ValueError(f"bind_port must be in 1..65535, got {self.bind_port}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.queue_capacity < 0:
            raise ValueError(f"queue_capacity must be >= 0, got {self.queue_capacity}")
        if self.max_body_bytes < 1:
            raise ValueError(f"max_body_bytes must be positive, got {self.max_body_bytes}")
        if self.request_timeout_s <= 0:
            raise ValueError(f"request_timeout_s must be positive, got {self.request_timeout_s}")


def error_body(code: str, message: str, detail: dict | None = None) -> bytes:
    envelope: dict = {"error": {"code": code, "message": message}}
    if detail is not None:
        envelope["error"]["detail"] = detail
    return json.dumps(envelope).encode("utf-8")


class WorkerPool:
    """Fixed worker threads behind a FIFO queue with a hard occupancy cap.

    Occupancy counts queued plus in-flight jobs; submit refuses (returns None)
    once occupancy reaches workers + queue_capacity. A job's slot is released
    when the job finishes, not when a waiting client gives up, so abandoned
    (timed-out) work still occupies its worker until done.
    """

    def __init__(self, service: Service, workers: int, queue_capacity: int):
        self._service = service
        self._capacity = workers + queue_capacity
        self._queue: queue.SimpleQueue = queue.SimpleQueue()
        self._lock = threading.Lock()
        self._occupancy = 0
        self._in_flight = 0
        self.high_water_mark = 0
        self._threads = [
            threading.Thread(target=self._run, name=f"mlserve-worker-{i}", daemon=True)
            for i in range(workers)
        ]

    def start(self) -> None:
        for t in self._threads:
            t.start()

    def stop(self) -> None:
        for _ in self._threads:
            self._queue.put(None)
        for t in self._threads:
            t.join(timeout=5.0)

    @property
    def occupancy(self) -> int:
        with self._lock:
            return self._occupancy

    def submit(self, request: dict) -> Future | None:
        """Admit a request; None means the queue is full (503)."""
        with self._lock:
            if self._occupancy >= self._capacity:
                return None
            self._occupancy += 1
        fut: Future = Future()
        self._queue.put((fut, request))
        return fut

    def _release(self) -> None:
        with self._lock:
            self._occupancy -= 1

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            fut, request = item
            if not fut.set_running_or_notify_cancel():
                self._release()
                continue
            with self._lock:
                self._in_flight += 1
                if self._in_flight > self.high_water_mark:
                    self.high_water_mark = self._in_flight
            try:
                fut.set_result(self._service.handle(request))
            except BaseException as exc:
                fut.set_exception(exc)
            finally:
                with self._lock:
                    self._in_flight -= 1
                self._release()


class _HttpServer(ThreadingHTTPServer):
    daemon_threads = True
    block_on_close = False
    rest_server: "RestServer"


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: _HttpServer

    def log_message(self, fmt, *args):
        log.debug("%s %s", self.address_string(), fmt % args)

    def _reply(self, status: int, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _reply_error(self, status: int, code: str, message: str, detail: dict | None = None) -> None:
        self._reply(status, error_body(code, message, detail))

    def do_GET(self):
        app = self.server.rest_server
        if self.path == "/health":
            info = app.service.info
            body = json.dumps({"status": "ok", "service": info.name, "version": info.version}).encode()
            self._reply(200, body)
        else:
            self._reply_error(404, "NOT_FOUND", f"no such endpoint: GET {self.path}")

    def do_POST(self):
        app = self.server.rest_server
        if self.path != "/api/process":
            self._reply_error(404, "NOT_FOUND", f"no such endpoint: POST {self.path}")
            return
        if app.draining:
            self._reply_error(503, "BUSY", "server is shutting down")
            return

        try:
            length = int(self.headers.get("Content-Length", 0) or 0)
        except ValueError:
            self._reply_error(400, BAD_REQUEST, "invalid Content-Length header")
            return
        if length > app.config.max_body_bytes:
            self.close_connection = True
            self._reply_error(413, "PAYLOAD_TOO_LARGE",
                              f"body of {length} bytes exceeds limit of {app.config.max_body_bytes}")
            return
        body = self.rfile.read(length) if length else b""

        try:
            request = json.loads(body)
        except (ValueError, UnicodeDecodeError):
            self._reply_error(400, BAD_REQUEST, "request body is not valid JSON")
            return
        if not isinstance(request, dict):
            self._reply_error(400, BAD_REQUEST, "request top level must be a JSON object")
            return

        fut = app.pool.submit(request)
        if fut is None:
            self._reply_error(503, "BUSY", "request queue is full, retry later")
            return
        try:
            response = fut.result(timeout=app.config.request_timeout_s)
        except FutureTimeout:
            fut.cancel()  # frees the slot if the job never started
            self.close_connection = True
            self._reply_error(504, "TIMEOUT", f"processing exceeded {app.config.request_timeout_s}s")
            return
        except ServiceError as exc:
            status = _STATUS_FOR_CODE.get(exc.code, 500)
            self._reply_error(status, exc.code, exc.message, exc.detail)
            return
        except Exception as exc:  # unexpected service crash
            log.exception("unhandled error while processing request")
            self._reply_error(500, INTERNAL, f"unexpected processing failure: {exc}")
            return
        self._reply(200, json.dumps(response).encode("utf-8"))


class RestServer:
    """Owns the HTTP listener and the worker pool for one service."""

    def __init__(self, service: Service, config: ServerConfig | None = None):
        self.service = service
        self.config = config or ServerConfig()
        self.pool = WorkerPool(service, self.config.workers, self.config.queue_capacity)
        self.draining = False
        self._httpd: _HttpServer | None = None
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        assert self._httpd is not None, "server not started"
        return self._httpd.server_address[1]

    def start(self) -> None:
        """Load the model, bind, and serve on a background thread.

        Raises LoadFailure if the model cannot load and OSError if the bind
        fails; in both cases nothing is served.
        """
        self.service.load()
        self._httpd = _HttpServer((self.config.bind_host, self.config.bind_port), _Handler)
        self._httpd.rest_server = self
        self.pool.start()
        self._thread = threading.Thread(target=lambda: self._httpd.serve_forever(poll_interval=0.05), name="mlserve-http", daemon=True)
        self._thread.start()
        log.info("serving %s on http://%s:%d with %d worker(s), queue %d",
                 self.service.info.name, self.config.bind_host, self.port,
                 self.config.workers, self.config.queue_capacity)

    def stop(self, drain_timeout_s: float = 8.0) -> None:
        """Drain in-flight work (new requests get 503), then shut down."""
        self.draining = True
        deadline = threading.Event()
        waited = 0.0
        while self.pool.occupancy > 0 and waited < drain_timeout_s:
            deadline.wait(0.05)
            waited += 0.05
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        self.pool.stop()
