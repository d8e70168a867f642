import math
import socket
import threading
from datetime import datetime, timedelta, timezone

import pytest

from mlserve.codecs import TimeSeries
from mlserve.service import Service, ServiceInfo

START = datetime(2018, 1, 1, tzinfo=timezone.utc)


def hourly_timestamps(n, start=START):
    return tuple(start + timedelta(hours=i) for i in range(n))


def make_series(values, start=START) -> TimeSeries:
    return TimeSeries(hourly_timestamps(len(values), start), tuple(values))


def sinusoid_series(days=14, base=100.0, amplitude=25.0, start=START) -> TimeSeries:
    # one exact day tiled, so the series is bit-exactly 24h-periodic
    day = [base + amplitude * math.sin(2 * math.pi * h / 24.0) for h in range(24)]
    return make_series(day * days, start)


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


class EchoService(Service):
    """Echoes the request back; optionally blocks on an event first."""

    info = ServiceInfo(name="echo", version="0", description="test stub")

    def __init__(self, gate: threading.Event | None = None, started: threading.Event | None = None):
        super().__init__()
        self.gate = gate
        self.started = started

    def process(self, request):
        if self.started is not None:
            self.started.set()
        if self.gate is not None:
            self.gate.wait(timeout=30)
        return {"echo": request}


@pytest.fixture
def echo_service():
    svc = EchoService()
    svc.load()
    return svc
