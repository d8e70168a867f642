"""Instance segmentation over Base64 tensor images: service and UI definition.

Classical pipeline: grayscale conversion, Otsu thresholding over a 256-bin
histogram, 4-connected component labeling in raster order, then a minimum
size filter. Labels in the response map are the contiguous set {0..K} with 0
as background, so cell count and mean size fall straight out of the map.
"""

from __future__ import annotations

import base64
import io
import json
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import __version__
from .codecs import CodecError, TensorPayload, tensor_from_array, tensor_to_array
from .gateway import (FileDownload, NumberDisplay, PlotImage, UIAppDefinition,
                      UserInputError)
from .schema import (File, ImageFile, InputSchema, Number, OutputSchema, Plot,
                     SchemaDescriptor)
from .service import UNPROCESSABLE, Service, ServiceError, ServiceInfo

HIST_BINS = 256
DEFAULT_MIN_PX = 4

#: label colors for the instances plot; background stays black
PALETTE = (
    (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
    (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
    (210, 245, 60), (250, 190, 212), (0, 128, 128), (220, 190, 255),
)

_LUMA = (0.299, 0.587, 0.114)
_DTYPE_MAX = {"u8": 255.0, "u16": 65535.0}


@dataclass(frozen=True)
class InstanceStats:
    count: int
    mean_size_px: float


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Scale a u8/u16 gray or RGB image into a float array in [0, 1]."""
    if image.dtype == np.uint8:
        scale = _DTYPE_MAX["u8"]
    elif image.dtype == np.uint16:
        scale = _DTYPE_MAX["u16"]
    else:
        raise ValueError(f"unsupported image dtype {image.dtype}")
    arr = image.astype(np.float64)
    if image.ndim == 3:
        arr = arr[:, :, 0] * _LUMA[0] + arr[:, :, 1] * _LUMA[1] + arr[:, :, 2] * _LUMA[2]
    return arr / scale


def _histogram(gray: np.ndarray) -> np.ndarray:
    bins = np.minimum((gray * HIST_BINS).astype(np.int64), HIST_BINS - 1)
    return np.bincount(bins.ravel(), minlength=HIST_BINS).astype(np.float64)


def _between_class_variance(hist: np.ndarray) -> np.ndarray:
    """sigma_b^2(t) for every candidate threshold t in 0..254."""
    total = hist.sum()
    levels = np.arange(HIST_BINS, dtype=np.float64)
    cum_count = np.cumsum(hist)
    cum_mass = np.cumsum(hist * levels)
    scores = np.zeros(HIST_BINS - 1)
    for t in range(HIST_BINS - 1):
        c0 = cum_count[t]
        c1 = total - c0
        if c0 == 0.0 or c1 == 0.0:
            continue
        mu0 = cum_mass[t] / c0
        mu1 = (cum_mass[-1] - cum_mass[t]) / c1
        scores[t] = (c0 / total) * (c1 / total) * (mu0 - mu1) ** 2
    return scores


def otsu_threshold(gray: np.ndarray) -> int:
    """Threshold bin maximizing between-class variance; ties take the smallest t.

    The foreground mask is bin(pixel) > t. A single-class image scores 0
    everywhere and yields t = 0.
    """
    if gray.size == 0:
        raise ValueError("cannot threshold an empty image")
    scores = _between_class_variance(_histogram(gray))
    return int(np.argmax(scores))


def binary_foreground(gray: np.ndarray) -> np.ndarray:
    """Otsu mask with the degenerate case resolved: a single populated bin
    separates into no classes at all, so nothing is foreground."""
    hist = _histogram(gray)
    scores = _between_class_variance(hist)
    if float(scores.max(initial=0.0)) == 0.0:
        return np.zeros(gray.shape, dtype=bool)
    t = int(np.argmax(scores))
    bins = np.minimum((gray * HIST_BINS).astype(np.int64), HIST_BINS - 1)
    return bins > t


def label_components(mask: np.ndarray, connectivity: int = 4) -> np.ndarray:
    """Two-pass union-find labeling, 4-connectivity.

    Labels are assigned 1..K in raster-scan order of each component's first
    pixel; background stays 0.
    """
    if connectivity != 4:
        raise ValueError("only 4-connectivity is supported")
    height, width = mask.shape
    parent = [0]  # parent[i] == i marks a root; index 0 unused

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    next_label = 1
    mask_list = mask.tolist()  # plain lists are much faster to scan than ndarray indexing
    prov = [[0] * width for _ in range(height)]
    for r in range(height):
        row = mask_list[r]
        prow = prov[r]
        above = prov[r - 1] if r > 0 else None
        for c in range(width):
            if not row[c]:
                continue
            up = above[c] if above is not None else 0
            left = prow[c - 1] if c > 0 else 0
            if up and left:
                ru, rl = find(up), find(left)
                keep = min(ru, rl)
                if ru != rl:
                    parent[max(ru, rl)] = keep
                prow[c] = keep
            elif up or left:
                prow[c] = up or left
            else:
                parent.append(next_label)
                prow[c] = next_label
                next_label += 1

    final = np.zeros((height, width), dtype=np.int32)
    remap: dict[int, int] = {}
    for r in range(height):
        prow = prov[r]
        for c in range(width):
            p = prow[c]
            if p == 0:
                continue
            root = find(p)
            label = remap.get(root)
            if label is None:
                label = len(remap) + 1
                remap[root] = label
            final[r, c] = label
    return final


def min_size_filter(labels: np.ndarray, min_px: int = DEFAULT_MIN_PX) -> np.ndarray:
    """Drop components smaller than min_px pixels and recompact the labels.

    Surviving labels keep their relative raster order, so the result is again
    a contiguous {0..K'} map.
    """
    k = int(labels.max(initial=0))
    if k == 0:
        return labels.copy()
    sizes = np.bincount(labels.ravel(), minlength=k + 1)
    lookup = np.zeros(k + 1, dtype=np.int32)
    new_label = 0
    for old in range(1, k + 1):
        if sizes[old] >= min_px:
            new_label += 1
            lookup[old] = new_label
    return lookup[labels]


def instance_stats(labels: np.ndarray) -> InstanceStats:
    """Cell count and mean pixel count per cell from a contiguous label map."""
    count = int(labels.max(initial=0))
    if count == 0:
        return InstanceStats(count=0, mean_size_px=0.0)
    foreground = int(np.count_nonzero(labels))
    return InstanceStats(count=count, mean_size_px=foreground / count)


def colorize_labels(labels: np.ndarray) -> np.ndarray:
    """Render a label map as RGB: black background, palette cycled by label."""
    height, width = labels.shape
    out = np.zeros((height, width, 3), dtype=np.uint8)
    palette = np.array(PALETTE, dtype=np.uint8)
    fg = labels > 0
    out[fg] = palette[(labels[fg] - 1) % len(PALETTE)]
    return out


class SegmentationService(Service):
    """JSON contract: {image: TensorPayload} -> {image: TensorPayload}.

    The response label map has the same height and width as the request and
    dtype i32, mirroring the request's structure.
    """

    info = ServiceInfo(name="segment", version=__version__,
                       description="Instance segmentation with per-cell statistics")

    def __init__(self, min_px: int = DEFAULT_MIN_PX):
        super().__init__()
        self.min_px = min_px

    def process(self, request: dict) -> dict:
        extra = set(request) - {"image"}
        if extra:
            raise ServiceError(UNPROCESSABLE, f"unknown request keys: {sorted(extra)}")
        if "image" not in request:
            raise ServiceError(UNPROCESSABLE, "missing request key 'image'")
        try:
            payload = TensorPayload.from_wire(request["image"])
            image = tensor_to_array(payload)
        except CodecError as exc:
            raise ServiceError(UNPROCESSABLE, f"invalid image payload: {exc}") from exc
        if payload.dtype not in ("u8", "u16"):
            raise ServiceError(UNPROCESSABLE, f"image dtype must be u8 or u16, got {payload.dtype}")
        shape = payload.shape
        if not (len(shape) == 2 or (len(shape) == 3 and shape[2] == 3)):
            raise ServiceError(UNPROCESSABLE, f"image shape must be [H,W] or [H,W,3], got {list(shape)}")
        if shape[0] < 1 or shape[1] < 1:
            raise ServiceError(UNPROCESSABLE, "image must have at least one row and column")

        labels = segment_image(image, min_px=self.min_px)
        return {"image": tensor_from_array(labels).to_wire()}


def segment_image(image: np.ndarray, min_px: int = DEFAULT_MIN_PX) -> np.ndarray:
    """Full pipeline from raw image array to filtered label map."""
    gray = to_grayscale(image)
    mask = binary_foreground(gray)
    labels = label_components(mask)
    return min_size_filter(labels, min_px=min_px)


# raster file decoding ----------------------------------------------------------

def decode_raster_file(filename: str, content: bytes) -> np.ndarray:
    """Decode an uploaded PNG (8/16-bit gray, 8-bit RGB) or binary PGM (P5)."""
    if content[:2] == b"P5":
        return _decode_pgm(content)
    try:
        img = Image.open(io.BytesIO(content))
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise UserInputError(f"could not decode image file {filename!r}: {exc}",
                             field_name="image") from exc
    if img.mode == "L":
        return np.asarray(img, dtype=np.uint8)
    if img.mode in ("I;16", "I;16B", "I;16L"):
        return np.asarray(img, dtype=np.uint16)
    if img.mode == "I":
        arr = np.asarray(img, dtype=np.int32)
        if arr.min(initial=0) < 0 or arr.max(initial=0) > 65535:
            raise UserInputError(f"image {filename!r} exceeds 16-bit range", field_name="image")
        return arr.astype(np.uint16)
    if img.mode == "RGB":
        return np.asarray(img, dtype=np.uint8)
    raise UserInputError(
        f"unsupported image mode {img.mode!r} in {filename!r}; "
        "use 8/16-bit grayscale or 8-bit RGB", field_name="image")


def _decode_pgm(content: bytes) -> np.ndarray:
    """Binary PGM (P5). Values above 255 use big-endian 16-bit words."""
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(content) and content[pos:pos + 1].isspace():
            pos += 1
        if content[pos:pos + 1] == b"#":
            while pos < len(content) and content[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(content) and not content[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise UserInputError("truncated PGM header", field_name="image")
        fields.append(content[start:pos])
    pos += 1  # single whitespace byte after maxval
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError:
        raise UserInputError("malformed PGM header", field_name="image") from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise UserInputError("PGM dimensions or maxval out of range", field_name="image")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    raw = content[pos:pos + expected]
    if len(raw) != expected:
        raise UserInputError(f"PGM pixel data truncated: {len(raw)} of {expected} bytes",
                             field_name="image")
    arr = np.frombuffer(raw, dtype=dtype).reshape(height, width)
    return arr.astype(np.uint16) if maxval > 255 else arr.copy()


# UI definition ------------------------------------------------------------------

INPUT_SCHEMA = InputSchema([
    ("image", ImageFile(label="Microscopy image (PNG or PGM)")),
])

OUTPUT_SCHEMA = OutputSchema([
    ("instances", Plot(kind="image", label="Instances")),
    ("cell_count", Number(label="Number of cells")),
    ("mean_cell_size", Number(label="Mean cell size (px)")),
    ("response_json", File(label="Service response (JSON)", extensions=(".json",))),
])


def descriptor() -> SchemaDescriptor:
    return SchemaDescriptor(
        app_name="Cell Segmentation",
        input_schema=INPUT_SCHEMA,
        output_schema=OUTPUT_SCHEMA,
        service_description="Segment cell instances in a microscopy image and report per-cell statistics.",
    )


def prepare_request(inputs: dict) -> dict:
    """Decode the uploaded raster file and emit the tensor request."""
    upload = inputs["image"]
    content = base64.b64decode(upload["content_base64"])
    image = decode_raster_file(upload["filename"], content)
    return {"image": tensor_from_array(image).to_wire()}


def process_response(request: dict, response: dict) -> list:
    """Instances image, the two statistics, and the raw response as a download."""
    labels = tensor_to_array(TensorPayload.from_wire(response["image"]))
    stats = instance_stats(labels)
    rendered = colorize_labels(labels)
    pretty = json.dumps(response, indent=2).encode("utf-8")
    return [
        PlotImage(title="Instances", image=tensor_from_array(rendered)),
        NumberDisplay(label="Number of cells", value=float(stats.count)),
        NumberDisplay(label="Mean cell size (px)", value=stats.mean_size_px),
        FileDownload(filename="response.json",
                     content_base64=base64.b64encode(pretty).decode("ascii"),
                     mime="application/json"),
    ]


def ui_definition(service_url: str) -> UIAppDefinition:
    return UIAppDefinition(descriptor=descriptor(), service_url=service_url,
                           prepare_request=prepare_request, process_response=process_response)
