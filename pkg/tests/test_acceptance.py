"""Acceptance suite: one test per release criterion, at the stated tolerance.

Run with `pytest tests/test_acceptance.py -s` to see one pass/fail line per
criterion. Everything here runs headless; no frontend build is needed.
"""

import base64
import functools
import json
import math
import random
import signal
import struct
import subprocess
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import requests

import mlserve.forecast as forecast
from mlserve.codecs import decode_tensor, encode_tensor
from mlserve.schema import (File, InputSchema, Number, SingleChoice, Text,
                            validate_input)
from mlserve.segment import (instance_stats, label_components, otsu_threshold,
                             segment_image, to_grayscale)
from mlserve.server import RestServer, ServerConfig
from mlserve.service import Service, ServiceInfo

from conftest import EchoService, free_port, make_series, sinusoid_series
from oracles import flood_fill_labels, otsu_exhaustive, ridge_normal_equations
from test_cli import wait_until_healthy
from test_forecast import oracle_features_targets, recursion_series
from test_schema import random_descriptor
from test_segment import five_squares_image


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"[ACCEPTANCE] {name}: PASS")
            return result
        return wrapper
    return decorate


@criterion("tensor codec round-trips bitwise, fixtures match reference")
def test_tensor_codec():
    started = time.monotonic()
    fixture = encode_tensor([0, 255, 7, 9], "u8", [2, 2])
    assert fixture.data == "AP8HCQ=="
    assert fixture.data == base64.b64encode(bytes([0, 255, 7, 9])).decode()
    scalar = encode_tensor([1.0], "f64", [])
    assert scalar.data == "AAAAAAAA8D8="
    assert scalar.data == base64.b64encode(struct.pack("<d", 1.0)).decode()

    rng = random.Random(20240101)
    dtypes = ("u8", "u16", "i32", "f32", "f64")
    for i in range(1000):
        dtype = dtypes[i % 5]
        rank = rng.randrange(5)
        shape = tuple(rng.randint(1, 5) for _ in range(rank))
        n = math.prod(shape)
        if dtype == "u8":
            elements = [rng.randrange(256) for _ in range(n)]
        elif dtype == "u16":
            elements = [rng.randrange(65536) for _ in range(n)]
        elif dtype == "i32":
            elements = [rng.randrange(-(2**31), 2**31) for _ in range(n)]
        else:
            elements = [rng.choice([rng.uniform(-1e30, 1e30), float("nan"), float("inf")])
                        for _ in range(n)]
        payload = encode_tensor(elements, dtype, shape)
        decoded, out_dtype, out_shape = decode_tensor(payload)
        assert out_dtype == dtype and out_shape == shape
        assert encode_tensor(decoded, dtype, shape).data == payload.data  # bitwise
    assert time.monotonic() - started < 5.0


@criterion("schema wire round-trip and all six validation issue codes")
def test_schema_round_trip_and_issue_codes():
    from mlserve.schema import schema_from_wire, schema_to_wire
    rng = random.Random(777)
    for _ in range(500):
        descriptor = random_descriptor(rng)
        assert schema_from_wire(schema_to_wire(descriptor)) == descriptor

    schema = InputSchema([
        ("a", Text()),
        ("b", Number(min=0, max=10)),
        ("c", SingleChoice(options=("x", "y"))),
        ("d", File()),
        ("t", Text()),
    ])
    raw = {
        "b": 99,
        "c": "z",
        "d": {"filename": "f", "content_base64": "!!"},
        "t": 5,
        "extra": 1,
    }
    report = validate_input(schema, raw)
    codes = {(issue.field, issue.code) for issue in report.issues}
    assert codes == {("a", "MISSING"), ("b", "OUT_OF_RANGE"), ("c", "UNKNOWN_OPTION"),
                     ("d", "BAD_FILE"), ("t", "TYPE_MISMATCH"), ("extra", "UNKNOWN_FIELD")}


@criterion("linear model matches construction (1e-6) and GE oracle (1e-8)")
def test_linear_model():
    series = recursion_series(days=30)
    weights = forecast.fit_linear(series)
    predicted = forecast.predict_linear(weights, series)
    truth = [0.5 * series.values[len(series) - 24 + h] + 10.0 for h in range(24)]
    assert max(abs(p - t) for p, t in zip(predicted, truth)) <= 1e-6

    rows, targets = oracle_features_targets(series)
    expected = np.array(ridge_normal_equations(rows, targets, lam=1e-6))
    got = np.array(weights.coefficients)
    assert np.max(np.abs(got - expected)) / np.max(np.abs(expected)) <= 1e-8


@criterion("seasonal naive: zero backtest error on periodic signal")
def test_seasonal_naive():
    series = sinusoid_series(days=14)
    from mlserve.codecs import TimeSeries
    train = TimeSeries(series.timestamps[:-24], series.values[:-24])
    predicted = forecast.seasonal_naive_forecast(train)
    held_out = list(series.values[-24:])
    assert predicted == held_out  # elementwise, exactly
    assert max(abs(p - a) for p, a in zip(predicted, held_out)) == 0.0
    assert forecast.seasonal_naive_forecast(series) == list(series.values[-24:])


@criterion("otsu equals exhaustive search on 200 random images")
def test_otsu_against_exhaustive_search():
    rng = np.random.default_rng(8675309)
    for _ in range(200):
        gray = to_grayscale(rng.integers(0, 256, size=(64, 64), dtype=np.uint8))
        expected, _ = otsu_exhaustive(gray)
        assert otsu_threshold(gray) == expected


@criterion("labeling equals flood-fill oracle; 5-square fixture stats exact")
def test_labeling_against_flood_fill():
    rng = np.random.default_rng(13579)
    for _ in range(100):
        mask = rng.random((32, 32)) < rng.uniform(0.2, 0.8)
        assert (label_components(mask) == flood_fill_labels(mask)).all()

    labels = segment_image(five_squares_image())
    stats = instance_stats(labels)
    assert stats.count == 5
    assert stats.mean_size_px == 64.0


@criterion("end-to-end HTTP: cmd_serve + cmd_call round trip under 10s")
def test_end_to_end_http(tmp_path):
    started = time.monotonic()
    series = sinusoid_series(days=14)
    request = {"models": ["Linear", "SeasonalNaive", "Mean"],
               "timestamps": series.timestamp_strings(),
               "values": list(series.values)}
    request_path = tmp_path / "request.json"
    request_path.write_text(json.dumps(request))
    out_path = tmp_path / "response.json"

    port = free_port()
    proc = subprocess.Popen([sys.executable, "-m", "mlserve", "serve", "forecast",
                             "--port", str(port)],
                            stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    try:
        assert wait_until_healthy(port, deadline_s=8.0)
        call = subprocess.run([sys.executable, "-m", "mlserve", "call",
                               "--service-url", f"http://127.0.0.1:{port}",
                               "--input", str(request_path), "--output", str(out_path)],
                              capture_output=True, text=True, timeout=30)
        assert call.returncode == 0, call.stderr
    finally:
        proc.send_signal(signal.SIGINT)
        proc.wait(timeout=15)

    response = json.loads(out_path.read_text())
    forecasts = response["forecasts"]
    assert [f["model"] for f in forecasts] == ["Linear", "SeasonalNaive", "Mean"]
    last = series.timestamps[-1]
    for f in forecasts:
        assert len(f["timestamps"]) == 24 and len(f["values"]) == 24
        stamps = [forecast.parse_timestamp(t) for t in f["timestamps"]]
        assert (stamps[0] - last).total_seconds() == 3600.0
        for a, b in zip(stamps, stamps[1:]):
            assert (b - a).total_seconds() == 3600.0
    assert time.monotonic() - started < 10.0


class _Stall100ms(Service):
    info = ServiceInfo(name="stall100", version="0")

    def process(self, request):
        time.sleep(0.1)
        return {"id": request["id"]}


class _GatedService(Service):
    info = ServiceInfo(name="gated", version="0")

    def __init__(self):
        super().__init__()
        self.gate = threading.Event()
        self.entered = threading.Event()

    def process(self, request):
        self.entered.set()
        self.gate.wait(timeout=30)
        return {"id": request.get("id")}


@criterion("concurrency: pool bound holds and queue overflow returns 503")
def test_concurrency_admission():
    server = RestServer(_Stall100ms(), ServerConfig(bind_port=free_port(),
                                                    workers=1, queue_capacity=16))
    server.start()
    try:
        url = f"http://127.0.0.1:{server.port}/api/process"
        with ThreadPoolExecutor(max_workers=16) as pool:
            futures = [pool.submit(requests.post, url, json={"id": i}, timeout=30)
                       for i in range(16)]
            responses = [f.result() for f in futures]
        assert all(r.status_code == 200 for r in responses)
        assert sorted(r.json()["id"] for r in responses) == list(range(16))
        assert server.pool.high_water_mark == 1
    finally:
        server.stop(drain_timeout_s=1.0)

    gated = _GatedService()
    server = RestServer(gated, ServerConfig(bind_port=free_port(), workers=1, queue_capacity=0))
    server.start()
    try:
        url = f"http://127.0.0.1:{server.port}/api/process"
        with ThreadPoolExecutor(max_workers=2) as pool:
            first = pool.submit(requests.post, url, json={"id": "a"}, timeout=30)
            assert gated.entered.wait(timeout=5)
            second = requests.post(url, json={"id": "b"}, timeout=5)
            assert second.status_code == 503
            gated.gate.set()
            assert first.result(timeout=10).status_code == 200
    finally:
        server.stop(drain_timeout_s=1.0)


@criterion("error envelope on every non-200 path of server and gateway")
def test_error_envelope_totality():
    from mlserve.gateway import GatewayServer, TextDisplay, UIAppDefinition
    from mlserve.schema import OutputSchema, SchemaDescriptor

    gated = _GatedService()
    server = RestServer(gated, ServerConfig(bind_port=free_port(), workers=1,
                                            queue_capacity=0, max_body_bytes=64,
                                            request_timeout_s=0.2))
    server.start()
    responses = []
    try:
        url = f"http://127.0.0.1:{server.port}"
        responses.append(requests.get(url + "/nope", timeout=5))
        responses.append(requests.post(url + "/api/process", data=b"{bad", timeout=5))
        responses.append(requests.post(url + "/api/process", data=b"[]", timeout=5))
        responses.append(requests.post(url + "/api/process", data=b"x" * 100, timeout=5))
        with ThreadPoolExecutor(max_workers=1) as pool:
            stalling = pool.submit(requests.post, url + "/api/process",
                                   json={"id": 1}, timeout=30)
            assert gated.entered.wait(timeout=5)
            responses.append(requests.post(url + "/api/process", json={}, timeout=5))  # 503
            timed_out = stalling.result(timeout=10)
            assert timed_out.status_code == 504
            responses.append(timed_out)
            gated.gate.set()
    finally:
        server.stop(drain_timeout_s=1.0)

    def failing_process(request, response):
        return []

    app = UIAppDefinition(
        descriptor=SchemaDescriptor("t", InputSchema([("name", Text())]),
                                    OutputSchema([("o", Text())])),
        service_url=f"http://127.0.0.1:{free_port()}",
        prepare_request=lambda raw: {"name": raw["name"]},
        process_response=failing_process)
    gateway = GatewayServer(app, port=free_port())
    gateway.start()
    try:
        url = f"http://127.0.0.1:{gateway.port}"
        responses.append(requests.post(url + "/ui/submit", data=b"{bad", timeout=5))   # 400
        responses.append(requests.post(url + "/ui/submit", json={}, timeout=5))         # 422
        responses.append(requests.post(url + "/ui/submit", json={"name": "x"}, timeout=5))  # 502
        responses.append(requests.get(url + "/no-bundle.js", timeout=5))                # 404
    finally:
        gateway.stop()

    # a full forecast stack for the remaining gateway codes: 500 + 422 via service
    from mlserve.forecast import ForecastService
    backend = RestServer(ForecastService(), ServerConfig(bind_port=free_port()))
    backend.start()
    bad_app = forecast.ui_definition(f"http://127.0.0.1:{backend.port}")
    bad_app.process_response = lambda request, response: []  # violates output schema
    gateway = GatewayServer(bad_app, port=free_port())
    gateway.start()
    try:
        url = f"http://127.0.0.1:{gateway.port}"
        series = sinusoid_series(days=14)
        lines = ["utc_timestamp,load"] + [f"{t},{v!r}" for t, v in
                                          zip(series.timestamp_strings(), series.values)]
        submission = {"models": ["Mean"],
                      "history": {"filename": "h.csv",
                                  "content_base64": base64.b64encode(("\n".join(lines) + "\n").encode()).decode()}}
        responses.append(requests.post(url + "/ui/submit", json=submission, timeout=30))  # 500
    finally:
        gateway.stop()
        backend.stop(drain_timeout_s=1.0)

    statuses = sorted(r.status_code for r in responses)
    assert statuses == [400, 400, 400, 404, 404, 413, 422, 500, 502, 503, 504]
    for response in responses:
        envelope = response.json()["error"]
        assert isinstance(envelope["code"], str) and envelope["code"]
        assert isinstance(envelope["message"], str) and envelope["message"]
