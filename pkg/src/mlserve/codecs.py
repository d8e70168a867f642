"""Bit-exact wire codecs: Base64 tensor payloads and hourly time-series CSV.

Tensor payloads are flat element lists laid out row-major (last axis fastest),
multi-byte dtypes little-endian, encoded with standard Base64 (RFC 4648
alphabet, padded). Time-series CSV is comma-separated UTF-8 with a header row
and no quoting support; timestamps are ISO-8601 and naive values are read as
UTC.
"""

from __future__ import annotations

import base64
import binascii
import math
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Sequence

import numpy as np

#: Wire dtype -> numpy dtype. Multi-byte payloads are always little-endian
#: regardless of host byte order.
DTYPES = {
    "u8": np.dtype("<u1"),
    "u16": np.dtype("<u2"),
    "i32": np.dtype("<i4"),
    "f32": np.dtype("<f4"),
    "f64": np.dtype("<f8"),
}

_NUMPY_TO_WIRE = {
    "uint8": "u8",
    "uint16": "u16",
    "int32": "i32",
    "float32": "f32",
    "float64": "f64",
}

_INT_RANGES = {
    "u8": (0, 2**8 - 1),
    "u16": (0, 2**16 - 1),
    "i32": (-(2**31), 2**31 - 1),
}

HOUR = timedelta(hours=1)
_UTC = timezone.utc


class CodecError(ValueError):
    """Malformed payload or CSV content.

    `code` is a stable machine-readable name. For CSV and series errors `row`
    is the 1-based data row (header excluded); None elsewhere.
    """

    def __init__(self, code: str, message: str, row: int | None = None):
        super().__init__(message)
        self.code = code
        self.row = row


def _check_shape(shape) -> tuple[int, ...]:
    out = []
    for d in shape:
        if isinstance(d, bool) or not isinstance(d, int) or d < 0:
            raise CodecError("BAD_PAYLOAD", f"shape entries must be non-negative integers, got {d!r}")
        out.append(d)
    return tuple(out)


@dataclass(frozen=True)
class TensorPayload:
    """Base64-encoded n-dimensional array with dtype and shape."""

    data: str
    dtype: str
    shape: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "shape", _check_shape(self.shape))

    def to_wire(self) -> dict:
        return {"data": self.data, "dtype": self.dtype, "shape": list(self.shape)}

    @classmethod
    def from_wire(cls, obj) -> "TensorPayload":
        if not isinstance(obj, dict):
            raise CodecError("BAD_PAYLOAD", "tensor payload must be a JSON object")
        missing = {"data", "dtype", "shape"} - set(obj)
        if missing:
            raise CodecError("BAD_PAYLOAD", f"tensor payload missing keys: {sorted(missing)}")
        data, dtype, shape = obj["data"], obj["dtype"], obj["shape"]
        if not isinstance(data, str) or not isinstance(dtype, str) or not isinstance(shape, list):
            raise CodecError("BAD_PAYLOAD", "tensor payload fields have wrong JSON types")
        return cls(data=data, dtype=dtype, shape=_check_shape(shape))


def encode_tensor(elements: Sequence, dtype: str, shape: Sequence[int]) -> TensorPayload:
    """Encode a flat element list as a TensorPayload.

    Elements are written row-major; 300 in u8 or a non-integral value in an
    integer dtype raises VALUE_RANGE, a length/shape disagreement raises
    LENGTH_MISMATCH.
    """
    if dtype not in DTYPES:
        raise CodecError("UNKNOWN_DTYPE", f"unknown dtype {dtype!r}, expected one of {sorted(DTYPES)}")
    shape = _check_shape(shape)
    n = math.prod(shape)
    if len(elements) != n:
        raise CodecError("LENGTH_MISMATCH", f"{len(elements)} elements for shape {list(shape)} (expected {n})")

    if dtype in _INT_RANGES:
        lo, hi = _INT_RANGES[dtype]
        ints = []
        for i, v in enumerate(elements):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise CodecError("VALUE_RANGE", f"element {i} ({v!r}) is not numeric")
            if isinstance(v, float) and not v.is_integer():
                raise CodecError("VALUE_RANGE", f"element {i} ({v!r}) is not an integer, dtype is {dtype}")
            iv = int(v)
            if iv < lo or iv > hi:
                raise CodecError("VALUE_RANGE", f"element {i} ({v!r}) outside {dtype} range [{lo}, {hi}]")
            ints.append(iv)
        arr = np.array(ints, dtype=np.int64).astype(DTYPES[dtype])
    else:
        floats = []
        for i, v in enumerate(elements):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise CodecError("VALUE_RANGE", f"element {i} ({v!r}) is not numeric")
            floats.append(float(v))
        wide = np.array(floats, dtype=np.float64)
        with np.errstate(over="ignore"):
            arr = wide.astype(DTYPES[dtype])
        if dtype == "f32" and len(floats):
            overflowed = np.isfinite(wide) & ~np.isfinite(arr.astype(np.float64))
            if overflowed.any():
                i = int(np.argmax(overflowed))
                raise CodecError("VALUE_RANGE", f"element {i} ({floats[i]!r}) overflows f32")

    raw = arr.tobytes(order="C")
    return TensorPayload(data=base64.b64encode(raw).decode("ascii"), dtype=dtype, shape=shape)


def decode_tensor(payload: TensorPayload) -> tuple[list, str, tuple[int, ...]]:
    """Exact inverse of encode_tensor on its image (bit-exact, NaN included)."""
    if payload.dtype not in DTYPES:
        raise CodecError("UNKNOWN_DTYPE", f"unknown dtype {payload.dtype!r}, expected one of {sorted(DTYPES)}")
    np_dtype = DTYPES[payload.dtype]
    try:
        raw = base64.b64decode(payload.data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise CodecError("BAD_BASE64", f"invalid Base64 payload: {exc}") from exc
    expected = math.prod(payload.shape) * np_dtype.itemsize
    if len(raw) != expected:
        raise CodecError(
            "LENGTH_MISMATCH",
            f"decoded {len(raw)} bytes, shape {list(payload.shape)} with dtype {payload.dtype} needs {expected}",
        )
    arr = np.frombuffer(raw, dtype=np_dtype)
    if payload.dtype in _INT_RANGES:
        elements = [int(v) for v in arr]
    else:
        elements = [float(v) for v in arr]
    return elements, payload.dtype, tuple(payload.shape)


def tensor_from_array(arr: np.ndarray) -> TensorPayload:
    """Encode an ndarray whose dtype is one of the wire dtypes."""
    name = np.dtype(arr.dtype).name
    if name not in _NUMPY_TO_WIRE:
        raise ValueError(f"array dtype {name} has no wire encoding")
    wire = _NUMPY_TO_WIRE[name]
    raw = np.ascontiguousarray(arr, dtype=DTYPES[wire]).tobytes(order="C")
    return TensorPayload(data=base64.b64encode(raw).decode("ascii"), dtype=wire, shape=tuple(arr.shape))


def tensor_to_array(payload: TensorPayload) -> np.ndarray:
    """Decode a payload into an ndarray of the corresponding numpy dtype."""
    if payload.dtype not in DTYPES:
        raise CodecError("UNKNOWN_DTYPE", f"unknown dtype {payload.dtype!r}, expected one of {sorted(DTYPES)}")
    np_dtype = DTYPES[payload.dtype]
    try:
        raw = base64.b64decode(payload.data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise CodecError("BAD_BASE64", f"invalid Base64 payload: {exc}") from exc
    expected = math.prod(payload.shape) * np_dtype.itemsize
    if len(raw) != expected:
        raise CodecError(
            "LENGTH_MISMATCH",
            f"decoded {len(raw)} bytes, shape {list(payload.shape)} with dtype {payload.dtype} needs {expected}",
        )
    return np.frombuffer(raw, dtype=np_dtype).reshape(payload.shape).copy()


def parse_timestamp(s: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are interpreted as UTC."""
    if not isinstance(s, str):
        raise CodecError("BAD_TIMESTAMP", f"timestamp must be a string, got {type(s).__name__}")
    txt = s.strip()
    if txt.endswith(("Z", "z")):
        txt = txt[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(txt)
    except ValueError as exc:
        raise CodecError("BAD_TIMESTAMP", f"not an ISO-8601 timestamp: {s!r}") from exc
    if dt.tzinfo is None:
        return dt.replace(tzinfo=_UTC)
    return dt.astimezone(_UTC)


def format_timestamp(dt: datetime) -> str:
    """Canonical wire form: 'YYYY-MM-DDTHH:MM:SSZ' in UTC."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=_UTC)
    else:
        dt = dt.astimezone(_UTC)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class TimeSeries:
    """Hourly series: parallel timestamp/value lists.

    Invariants enforced at construction: equal lengths, strictly increasing
    timestamps exactly one hour apart, all values finite.
    """

    timestamps: tuple[datetime, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        ts = []
        for t in self.timestamps:
            if not isinstance(t, datetime):
                raise CodecError("BAD_TIMESTAMP", f"timestamps must be datetimes, got {type(t).__name__}")
            ts.append(t.replace(tzinfo=_UTC) if t.tzinfo is None else t.astimezone(_UTC))
        vals = []
        for i, v in enumerate(self.values):
            try:
                f = float(v)
            except (TypeError, ValueError):
                raise CodecError("BAD_NUMBER", f"value {v!r} is not a number", row=i + 1) from None
            if not math.isfinite(f):
                raise CodecError("BAD_NUMBER", f"value {f!r} is not finite", row=i + 1)
            vals.append(f)
        if len(ts) != len(vals):
            raise CodecError("LENGTH_MISMATCH", f"{len(ts)} timestamps vs {len(vals)} values")
        for i in range(1, len(ts)):
            step = ts[i] - ts[i - 1]
            if step <= timedelta(0):
                raise CodecError("NON_MONOTONIC_TIME", f"timestamp at row {i + 1} does not increase", row=i + 1)
            if step != HOUR:
                raise CodecError("NON_HOURLY_STEP", f"step at row {i + 1} is {step}, expected 1 hour", row=i + 1)
        object.__setattr__(self, "timestamps", tuple(ts))
        object.__setattr__(self, "values", tuple(vals))

    def __len__(self) -> int:
        return len(self.values)

    @classmethod
    def from_wire_lists(cls, timestamps: Sequence[str], values: Sequence) -> "TimeSeries":
        """Build from the wire representation (ISO strings + numbers)."""
        return cls(tuple(parse_timestamp(t) for t in timestamps), tuple(values))

    def timestamp_strings(self) -> list[str]:
        return [format_timestamp(t) for t in self.timestamps]


def parse_timeseries_csv(content: bytes, time_column: str, value_column: str) -> TimeSeries:
    """Parse a header-row CSV into a TimeSeries, selecting two named columns.

    Comma separator, no quoting support. Error rows are 1-based data rows.
    """
    try:
        text = content.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CodecError("BAD_ENCODING", f"CSV is not valid UTF-8: {exc}") from exc
    text = text.lstrip("﻿")
    lines = [line[:-1] if line.endswith("\r") else line for line in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CodecError("MISSING_COLUMN", "CSV is empty, no header row")
    header = lines[0].split(",")
    for col in (time_column, value_column):
        if col not in header:
            raise CodecError("MISSING_COLUMN", f"column {col!r} not in header {header}")
    t_idx = header.index(time_column)
    v_idx = header.index(value_column)

    timestamps: list[datetime] = []
    values: list[float] = []
    for row, line in enumerate(lines[1:], start=1):
        cells = line.split(",")
        if len(cells) != len(header):
            raise CodecError("RAGGED_ROW", f"row {row} has {len(cells)} cells, header has {len(header)}", row=row)
        try:
            timestamps.append(parse_timestamp(cells[t_idx]))
        except CodecError as exc:
            raise CodecError("BAD_TIMESTAMP", f"row {row}: {exc}", row=row) from None
        try:
            values.append(float(cells[v_idx]))
        except ValueError:
            raise CodecError("BAD_NUMBER", f"row {row}: {cells[v_idx]!r} is not a number", row=row) from None

    return TimeSeries(tuple(timestamps), tuple(values))


def render_forecast_csv(forecasts: Sequence) -> bytes:
    """Render forecasts to CSV: header 'utc_timestamp,<model>,...', LF endings.

    Each forecast needs .model, .timestamps and .values; all must share
    identical timestamps. Values use repr(), the shortest representation that
    parses back to the same float.
    """
    names = [f.model for f in forecasts]
    lines = ["utc_timestamp" + "".join("," + n for n in names)]
    if forecasts:
        base = tuple(forecasts[0].timestamps)
        for f in forecasts[1:]:
            if tuple(f.timestamps) != base:
                raise CodecError("TIMESTAMP_MISMATCH", f"forecast {f.model!r} timestamps differ from {forecasts[0].model!r}")
        for i, t in enumerate(base):
            cells = [format_timestamp(t)] + [repr(float(f.values[i])) for f in forecasts]
            lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")
