import base64
import io
import json

import numpy as np
import pytest

from mlserve.codecs import TensorPayload, tensor_from_array, tensor_to_array
from mlserve.gateway import (FileDownload, NumberDisplay, PlotImage,
                             UserInputError)
from mlserve.segment import (PALETTE, SegmentationService, binary_foreground,
                             colorize_labels, decode_raster_file,
                             instance_stats, label_components, min_size_filter,
                             otsu_threshold, prepare_request, process_response,
                             segment_image, to_grayscale)
from mlserve.service import ServiceError

from oracles import flood_fill_labels, otsu_exhaustive


def five_squares_image(size=64, background=10, foreground=200):
    """Five disjoint 8x8 squares; the canonical segmentation fixture."""
    img = np.full((size, size), background, dtype=np.uint8)
    for r, c in [(4, 4), (4, 30), (30, 4), (30, 30), (50, 50)]:
        img[r:r + 8, c:c + 8] = foreground
    return img


class TestGrayscale:
    def test_u8_range_endpoints(self):
        gray = to_grayscale(np.array([[0, 255]], dtype=np.uint8))
        assert gray.tolist() == [[0.0, 1.0]]

    def test_u16_max(self):
        gray = to_grayscale(np.array([[65535]], dtype=np.uint16))
        assert gray[0, 0] == 1.0

    def test_rgb_white_is_one(self):
        rgb = np.full((1, 1, 3), 255, dtype=np.uint8)
        assert abs(to_grayscale(rgb)[0, 0] - 1.0) <= 1e-9

    def test_luma_weights(self):
        red = np.zeros((1, 1, 3), dtype=np.uint8)
        red[0, 0, 0] = 255
        assert abs(to_grayscale(red)[0, 0] - 0.299) <= 1e-12


class TestOtsu:
    def test_two_bin_image_takes_smallest_tied_threshold(self):
        # mass only at bins 10 and 200: every t in 10..199 ties, 10 wins
        gray = to_grayscale(five_squares_image())
        assert otsu_threshold(gray) == 10

    def test_constant_image_threshold_zero(self):
        gray = np.full((8, 8), 0.7)
        assert otsu_threshold(gray) == 0
        assert not binary_foreground(gray).any()

    def test_matches_exhaustive_search_on_random_images(self):
        rng = np.random.default_rng(1234)
        for _ in range(200):
            img = rng.integers(0, 256, size=(64, 64), dtype=np.uint8)
            gray = to_grayscale(img)
            ours = otsu_threshold(gray)
            expected, _ = otsu_exhaustive(gray)
            assert ours == expected

    def test_foreground_rule(self):
        gray = to_grayscale(five_squares_image())
        mask = binary_foreground(gray)
        assert mask.sum() == 5 * 64
        assert mask[4, 4] and not mask[0, 0]


class TestLabeling:
    def test_empty_mask(self):
        labels = label_components(np.zeros((5, 5), dtype=bool))
        assert labels.max() == 0 and labels.dtype == np.int32

    def test_two_blocks(self):
        mask = np.zeros((6, 6), dtype=bool)
        mask[0:2, 0:2] = True
        mask[4:6, 4:6] = True
        labels = label_components(mask)
        expected = flood_fill_labels(mask)
        assert (labels == expected).all()
        assert labels.max() == 2
        assert (np.bincount(labels.ravel())[1:] == [4, 4]).all()

    def test_diagonal_pixels_are_separate_components(self):
        mask = np.zeros((2, 2), dtype=bool)
        mask[0, 0] = mask[1, 1] = True
        labels = label_components(mask)
        assert labels[0, 0] == 1 and labels[1, 1] == 2

    def test_raster_order_label_assignment(self):
        # U-shape: the two arms meet at the bottom; one component, first
        # pixel in raster order gets label 1
        mask = np.zeros((3, 3), dtype=bool)
        mask[:, 0] = True
        mask[:, 2] = True
        mask[2, 1] = True
        labels = label_components(mask)
        assert labels.max() == 1
        assert (labels == flood_fill_labels(mask)).all()

    def test_matches_flood_fill_on_random_masks(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            mask = rng.random((32, 32)) < rng.uniform(0.2, 0.8)
            labels = label_components(mask)
            expected = flood_fill_labels(mask)
            assert (labels == expected).all()

    def test_labels_contiguous(self):
        rng = np.random.default_rng(3)
        mask = rng.random((40, 40)) < 0.5
        labels = label_components(mask)
        k = labels.max()
        assert set(np.unique(labels)) == set(range(k + 1))


class TestMinSizeFilter:
    def test_single_pixel_removed(self):
        labels = np.zeros((4, 4), dtype=np.int32)
        labels[2, 2] = 1
        assert min_size_filter(labels, min_px=4).max() == 0

    def test_all_large_components_unchanged(self):
        mask = np.zeros((8, 8), dtype=bool)
        mask[0:2, 0:2] = True
        mask[5:7, 5:7] = True
        labels = label_components(mask)
        assert (min_size_filter(labels, min_px=4) == labels).all()

    def test_mixed_sizes_match_filter_then_relabel_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            mask = rng.random((24, 24)) < 0.35
            labels = label_components(mask)
            filtered = min_size_filter(labels, min_px=4)
            # oracle: zero-out small components on the mask, then flood fill
            sizes = np.bincount(labels.ravel())
            keep_mask = mask.copy()
            for lbl in range(1, labels.max() + 1):
                if sizes[lbl] < 4:
                    keep_mask[labels == lbl] = False
            assert (filtered == flood_fill_labels(keep_mask)).all()

    def test_labels_stay_contiguous_after_filter(self):
        rng = np.random.default_rng(8)
        mask = rng.random((32, 32)) < 0.4
        filtered = min_size_filter(label_components(mask), min_px=4)
        k = filtered.max()
        assert set(np.unique(filtered)) == set(range(k + 1)) or k == 0


class TestStats:
    def test_five_squares_stats(self):
        labels = segment_image(five_squares_image())
        stats = instance_stats(labels)
        assert stats.count == 5
        assert stats.mean_size_px == 64.0

    def test_empty_map(self):
        stats = instance_stats(np.zeros((4, 4), dtype=np.int32))
        assert stats.count == 0 and stats.mean_size_px == 0.0

    def test_count_times_mean_is_foreground_total(self):
        rng = np.random.default_rng(5)
        mask = rng.random((32, 32)) < 0.5
        labels = min_size_filter(label_components(mask), min_px=2)
        stats = instance_stats(labels)
        assert stats.count * stats.mean_size_px == np.count_nonzero(labels)


class TestPipelineProperties:
    def test_resegmenting_binarized_labels_reproduces_partition(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            img = rng.integers(0, 256, size=(32, 32), dtype=np.uint8)
            labels = segment_image(img)
            binarized = np.where(labels > 0, 255, 0).astype(np.uint8)
            again = segment_image(binarized)
            assert (again == labels).all()

    def test_response_shape_matches_request(self):
        rng = np.random.default_rng(9)
        img = rng.integers(0, 256, size=(17, 23), dtype=np.uint8)
        assert segment_image(img).shape == img.shape


class TestSegmentationService:
    @pytest.fixture
    def service(self):
        svc = SegmentationService()
        svc.load()
        return svc

    def test_zeros_image_gives_zero_map(self, service):
        img = np.zeros((64, 64), dtype=np.uint8)
        response = service.handle({"image": tensor_from_array(img).to_wire()})
        labels = tensor_to_array(TensorPayload.from_wire(response["image"]))
        assert labels.dtype == np.int32 and labels.shape == (64, 64)
        assert not labels.any()

    def test_tiny_zero_image(self, service):
        img = np.zeros((2, 2), dtype=np.uint8)
        response = service.handle({"image": tensor_from_array(img).to_wire()})
        labels = tensor_to_array(TensorPayload.from_wire(response["image"]))
        assert labels.tolist() == [[0, 0], [0, 0]]

    def test_five_squares_end_to_end(self, service):
        response = service.handle({"image": tensor_from_array(five_squares_image()).to_wire()})
        labels = tensor_to_array(TensorPayload.from_wire(response["image"]))
        assert labels.max() == 5
        assert (np.bincount(labels.ravel())[1:] == 64).all()

    def test_four_channel_rejected(self, service):
        img = np.zeros((4, 4, 4), dtype=np.uint8)
        with pytest.raises(ServiceError) as info:
            service.handle({"image": tensor_from_array(img).to_wire()})
        assert info.value.code == "UNPROCESSABLE"

    def test_wrong_dtype_rejected(self, service):
        img = np.zeros((4, 4), dtype=np.int32)
        with pytest.raises(ServiceError) as info:
            service.handle({"image": tensor_from_array(img).to_wire()})
        assert info.value.code == "UNPROCESSABLE"

    def test_bad_payload_rejected(self, service):
        with pytest.raises(ServiceError) as info:
            service.handle({"image": {"data": "AAA", "dtype": "u8", "shape": [4]}})
        assert info.value.code == "UNPROCESSABLE"

    def test_rgb_accepted(self, service):
        img = np.zeros((8, 8, 3), dtype=np.uint8)
        img[2:5, 2:5] = 200
        response = service.handle({"image": tensor_from_array(img).to_wire()})
        labels = tensor_to_array(TensorPayload.from_wire(response["image"]))
        assert labels.max() == 1 and labels.shape == (8, 8)


def _png_bytes(arr):
    from PIL import Image
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def _file_value(content: bytes, name):
    return {"filename": name, "content_base64": base64.b64encode(content).decode()}


class TestRasterDecoding:
    def test_png_gray8(self):
        arr = five_squares_image()
        decoded = decode_raster_file("img.png", _png_bytes(arr))
        assert decoded.dtype == np.uint8 and (decoded == arr).all()

    def test_png_rgb(self):
        rng = np.random.default_rng(2)
        arr = rng.integers(0, 256, size=(10, 12, 3), dtype=np.uint8)
        decoded = decode_raster_file("img.png", _png_bytes(arr))
        assert decoded.dtype == np.uint8 and (decoded == arr).all()

    def test_png_gray16(self):
        rng = np.random.default_rng(4)
        arr = rng.integers(0, 65536, size=(6, 7), dtype=np.uint16)
        decoded = decode_raster_file("img.png", _png_bytes(arr))
        assert decoded.dtype == np.uint16 and (decoded == arr).all()

    def test_pgm_8bit(self):
        arr = five_squares_image(size=16)
        header = f"P5\n# comment\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode()
        decoded = decode_raster_file("img.pgm", header + arr.tobytes())
        assert (decoded == arr).all()

    def test_pgm_16bit_big_endian(self):
        arr = np.array([[0, 1000], [65535, 7]], dtype=np.uint16)
        content = b"P5\n2 2\n65535\n" + arr.astype(">u2").tobytes()
        decoded = decode_raster_file("img.pgm", content)
        assert decoded.dtype == np.uint16 and (decoded == arr).all()

    def test_undecodable_file(self):
        with pytest.raises(UserInputError):
            decode_raster_file("junk.png", b"this is not an image")

    def test_truncated_pgm(self):
        with pytest.raises(UserInputError):
            decode_raster_file("img.pgm", b"P5\n4 4\n255\nxx")


class TestHooks:
    def _run(self, image_bytes, name="cells.png"):
        svc = SegmentationService()
        svc.load()
        request = prepare_request({"image": _file_value(image_bytes, name)})
        response = svc.handle(request)
        return request, response

    def test_five_square_png_yields_count_and_size(self):
        request, response = self._run(_png_bytes(five_squares_image()))
        items = process_response(request, response)
        assert items[1].value == 5.0
        assert items[2].value == 64.0

    def test_output_variants(self):
        request, response = self._run(_png_bytes(five_squares_image()))
        items = process_response(request, response)
        assert [type(i) for i in items] == [PlotImage, NumberDisplay, NumberDisplay, FileDownload]

    def test_downloaded_json_is_the_response(self):
        request, response = self._run(_png_bytes(five_squares_image()))
        download = process_response(request, response)[3]
        assert download.filename == "response.json"
        assert json.loads(base64.b64decode(download.content_base64)) == response

    def test_instances_image_is_colorized_rgb(self):
        request, response = self._run(_png_bytes(five_squares_image()))
        plot = process_response(request, response)[0]
        img = tensor_to_array(plot.image)
        assert img.shape == (64, 64, 3)
        assert (img[0, 0] == [0, 0, 0]).all()  # background black
        assert tuple(img[4, 4]) == PALETTE[0]
        assert tuple(img[50, 50]) == PALETTE[4]

    def test_palette_cycles_after_twelve_labels(self):
        labels = np.arange(1, 26, dtype=np.int32).reshape(5, 5)
        colored = colorize_labels(labels)
        assert tuple(colored[0, 0]) == PALETTE[0]
        assert tuple(colored[2, 2]) == PALETTE[0]  # label 13 wraps
        assert tuple(colored[4, 4]) == PALETTE[0]  # label 25 wraps twice

    def test_ui_schema_round_trips(self):
        import mlserve.segment as segment
        from mlserve.schema import schema_from_wire, schema_to_wire
        d = segment.descriptor()
        assert schema_from_wire(schema_to_wire(d)) == d
        assert len(d.input_schema) == 1 and len(d.output_schema) == 4
