"""Single entry point: launch services and gateways, call services headlessly,
and health-check deployments.

Every flag has an MLSERVE_-prefixed environment variable twin; flags win.
Exit codes are stable: 0 success, 1 runtime failure (bind/load, non-200,
unhealthy), 2 bad flags or unreadable input, 3 connection failure (call).
Logs go to stderr; stdout carries only documented payloads.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
import threading
from pathlib import Path

import requests

APPS = ("forecast", "segment")


def _fail_usage(message: str) -> "int":
    print(f"mlserve: error: {message}", file=sys.stderr)
    return 2


def _resolve(value, env_key: str, fallback, caster=str):
    """Flag value if given, else environment, else fallback."""
    if value is not None:
        return value, None
    raw = os.environ.get(env_key)
    if raw is None:
        return fallback, None
    try:
        return caster(raw), None
    except ValueError:
        return None, f"environment {env_key}={raw!r} is not a valid {caster.__name__}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlserve",
        description="Serve model-inference apps over REST, host their web UI, "
                    "or talk to a running service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run an app's REST service")
    serve.add_argument("app", choices=APPS)
    serve.add_argument("--host", default=None, help="bind host (MLSERVE_HOST, default 127.0.0.1)")
    serve.add_argument("--port", type=int, default=None, help="bind port (MLSERVE_PORT, default 8000)")
    serve.add_argument("--workers", type=int, default=None,
                       help="simultaneous process slots (MLSERVE_WORKERS, default 1)")
    serve.add_argument("--queue-capacity", type=int, default=None,
                       help="waiting requests before 503 (MLSERVE_QUEUE_CAPACITY, default 32)")

    ui = sub.add_parser("ui", help="run the web UI gateway for an app")
    ui.add_argument("app", choices=APPS)
    ui.add_argument("--service-url", default=None,
                    help="base URL of the running service (MLSERVE_SERVICE_URL)")
    ui.add_argument("--host", default=None, help="bind host (MLSERVE_HOST, default 127.0.0.1)")
    ui.add_argument("--port", type=int, default=None, help="bind port (MLSERVE_PORT, default 8080)")
    ui.add_argument("--static-dir", default=None,
                    help="frontend bundle directory (MLSERVE_STATIC_DIR)")

    call = sub.add_parser("call", help="POST a JSON request file to a service")
    call.add_argument("--service-url", default=None, help="base URL (MLSERVE_SERVICE_URL)")
    call.add_argument("--input", dest="input_path", default=None,
                      help="request JSON file (MLSERVE_INPUT)")
    call.add_argument("--output", dest="output_path", default=None,
                      help="response destination, '-' for stdout (MLSERVE_OUTPUT, default '-')")
    call.add_argument("--timeout", type=float, default=None,
                      help="request timeout seconds (MLSERVE_TIMEOUT_S, default 300)")

    health = sub.add_parser("health", help="check a service's /health endpoint")
    health.add_argument("--service-url", default=None, help="base URL (MLSERVE_SERVICE_URL)")
    health.add_argument("--timeout", type=float, default=None,
                        help="request timeout seconds (MLSERVE_TIMEOUT_S, default 10)")

    return parser


def _build_service(app: str):
    if app == "forecast":
        from .forecast import ForecastService
        return ForecastService()
    from .segment import SegmentationService
    return SegmentationService()


def _build_ui_definition(app: str, service_url: str):
    if app == "forecast":
        from .forecast import ui_definition
    else:
        from .segment import ui_definition
    return ui_definition(service_url)


def _wait_for_signal() -> threading.Event:
    stop = threading.Event()

    def _on_signal(signum, frame):
        logging.getLogger("mlserve.cli").info("received %s, shutting down", signal.Signals(signum).name)
        stop.set()

    signal.signal(signal.SIGINT, _on_signal)
    signal.signal(signal.SIGTERM, _on_signal)
    return stop


def cmd_serve(args) -> int:
    from .server import RestServer, ServerConfig
    from .service import LoadFailure

    host, err0 = _resolve(args.host, "MLSERVE_HOST", "127.0.0.1")
    port, err1 = _resolve(args.port, "MLSERVE_PORT", 8000, int)
    workers, err2 = _resolve(args.workers, "MLSERVE_WORKERS", 1, int)
    queue_capacity, err3 = _resolve(args.queue_capacity, "MLSERVE_QUEUE_CAPACITY", 32, int)
    for e in (err0, err1, err2, err3):
        if e:
            return _fail_usage(e)

    try:
        config = ServerConfig(bind_host=host, bind_port=port, workers=workers,
                              queue_capacity=queue_capacity)
    except ValueError as exc:
        return _fail_usage(str(exc))

    server = RestServer(_build_service(args.app), config)
    stop = _wait_for_signal()
    try:
        server.start()
    except LoadFailure as exc:
        print(f"mlserve: model load failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"mlserve: cannot bind {host}:{port}: {exc}", file=sys.stderr)
        return 1
    stop.wait()
    server.stop(drain_timeout_s=8.0)
    return 0


def cmd_ui(args) -> int:
    from .gateway import GatewayServer

    service_url, err0 = _resolve(args.service_url, "MLSERVE_SERVICE_URL", None)
    host, err1 = _resolve(args.host, "MLSERVE_HOST", "127.0.0.1")
    port, err2 = _resolve(args.port, "MLSERVE_PORT", 8080, int)
    static_dir, err3 = _resolve(args.static_dir, "MLSERVE_STATIC_DIR", None)
    for e in (err0, err1, err2, err3):
        if e:
            return _fail_usage(e)
    if not service_url:
        return _fail_usage("--service-url (or MLSERVE_SERVICE_URL) is required")
    if static_dir is not None and not Path(static_dir).is_dir():
        return _fail_usage(f"static dir {static_dir!r} is not a directory")

    gateway = GatewayServer(_build_ui_definition(args.app, service_url),
                            host=host, port=port, static_dir=static_dir)
    stop = _wait_for_signal()
    try:
        gateway.start()
    except OSError as exc:
        print(f"mlserve: cannot bind {host}:{port}: {exc}", file=sys.stderr)
        return 1
    stop.wait()
    gateway.stop()
    return 0


def cmd_call(args) -> int:
    service_url, err0 = _resolve(args.service_url, "MLSERVE_SERVICE_URL", None)
    input_path, err1 = _resolve(args.input_path, "MLSERVE_INPUT", None)
    output_path, err2 = _resolve(args.output_path, "MLSERVE_OUTPUT", "-")
    timeout, err3 = _resolve(args.timeout, "MLSERVE_TIMEOUT_S", 300.0, float)
    for e in (err0, err1, err2, err3):
        if e:
            return _fail_usage(e)
    if not service_url:
        return _fail_usage("--service-url (or MLSERVE_SERVICE_URL) is required")
    if not input_path:
        return _fail_usage("--input (or MLSERVE_INPUT) is required")

    try:
        request = json.loads(Path(input_path).read_bytes())
    except OSError as exc:
        return _fail_usage(f"cannot read {input_path!r}: {exc}")
    except ValueError as exc:
        return _fail_usage(f"{input_path!r} is not valid JSON: {exc}")
    if not isinstance(request, dict):
        return _fail_usage(f"{input_path!r} must contain a JSON object")

    url = service_url.rstrip("/") + "/api/process"
    try:
        response = requests.post(url, json=request, timeout=timeout)
    except requests.exceptions.RequestException as exc:
        print(f"mlserve: cannot reach {url}: {exc}", file=sys.stderr)
        return 3

    if response.status_code != 200:
        print(response.text, file=sys.stderr)
        return 1

    body = response.content
    if not body.endswith(b"\n"):
        body += b"\n"
    if output_path == "-":
        sys.stdout.buffer.write(body)
        sys.stdout.buffer.flush()
    else:
        Path(output_path).write_bytes(body)
    return 0


def cmd_health(args) -> int:
    service_url, err0 = _resolve(args.service_url, "MLSERVE_SERVICE_URL", None)
    timeout, err1 = _resolve(args.timeout, "MLSERVE_TIMEOUT_S", 10.0, float)
    for e in (err0, err1):
        if e:
            return _fail_usage(e)
    if not service_url:
        return _fail_usage("--service-url (or MLSERVE_SERVICE_URL) is required")

    url = service_url.rstrip("/") + "/health"
    try:
        response = requests.get(url, timeout=timeout)
    except requests.exceptions.RequestException as exc:
        print(f"mlserve: cannot reach {url}: {exc}", file=sys.stderr)
        return 1
    body_ok = False
    try:
        body = response.json()
        body_ok = isinstance(body, dict) and body.get("status") == "ok"
    except ValueError:
        pass
    if response.status_code != 200 or not body_ok:
        print(f"mlserve: unhealthy: HTTP {response.status_code}: {response.text}", file=sys.stderr)
        return 1
    print(response.text)
    return 0


_COMMANDS = {"serve": cmd_serve, "ui": cmd_ui, "call": cmd_call, "health": cmd_health}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
