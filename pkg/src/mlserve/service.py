"""The service abstraction: model lifecycle plus JSON-in/JSON-out processing.

A service loads its model once (load_model), then answers any number of
process calls. Processing must be read-only on model state and deterministic
for a fixed loaded model, which is what lets the server run several worker
slots without locking.
"""

from __future__ import annotations

from dataclasses import dataclass

BAD_REQUEST = "BAD_REQUEST"
UNPROCESSABLE = "UNPROCESSABLE"
INTERNAL = "INTERNAL"

_ERROR_CODES = (BAD_REQUEST, UNPROCESSABLE, INTERNAL)


class ServiceError(Exception):
    """Processing failure with a wire-mappable code and human-readable message."""

    def __init__(self, code: str, message: str, detail: dict | None = None):
        if code not in _ERROR_CODES:
            raise ValueError(f"unknown service error code {code!r}")
        if not message:
            raise ValueError("service error message must be non-empty")
        super().__init__(message)
        self.code = code
        self.message = message
        self.detail = detail


class LoadFailure(Exception):
    """Model loading failed; the server must refuse to start."""


@dataclass(frozen=True)
class ServiceInfo:
    name: str
    version: str
    description: str = ""

    def __post_init__(self):
        if not self.name:
            raise ValueError("service name must be non-empty")


class Service:
    """Base class for deployable services.

    Subclasses override load_model (optional) and process (required). The
    framework drives the lifecycle through load() and handle(); calling
    process before the model is loaded is a programming error and surfaces
    as an INTERNAL ServiceError.
    """

    info = ServiceInfo(name="service", version="0")

    def __init__(self):
        self._ready = False

    def load_model(self) -> None:
        """Load model state. Called exactly once before any process call."""

    def process(self, request: dict) -> dict:
        """Answer one JSON request with a JSON response. Must be read-only."""
        raise NotImplementedError

    # framework entry points -------------------------------------------------

    def load(self) -> None:
        """Run load_model; any failure aborts startup (never serve half-loaded)."""
        try:
            self.load_model()
        except Exception as exc:
            raise LoadFailure(f"{self.info.name}: load_model failed: {exc}") from exc
        self._ready = True

    def handle(self, request: dict) -> dict:
        """Guarded dispatch used by the server and tests."""
        if not self._ready:
            raise ServiceError(INTERNAL, "process called before load_model completed")
        if not isinstance(request, dict):
            raise ServiceError(BAD_REQUEST, "request top level must be a JSON object")
        response = self.process(request)
        if not isinstance(response, dict):
            raise ServiceError(INTERNAL, f"{self.info.name}: process returned {type(response).__name__}, expected a JSON object")
        return response
