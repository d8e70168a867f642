"""The two wire codecs: Base64 tensor payloads and hourly time-series CSV.

Tensors travel inside JSON as {"data": <base64>, "dtype": ..., "shape": ...},
row-major and little-endian, so any client in any language can produce and
consume them with nothing but a Base64 routine.
"""

import numpy as np

from mlserve import (decode_tensor, encode_tensor, parse_timeseries_csv,
                     render_forecast_csv, tensor_from_array, tensor_to_array)

# a tiny 2x2 u8 image; the encoding is fully pinned down, byte for byte
payload = encode_tensor([0, 255, 7, 9], "u8", [2, 2])
print("payload:", payload.to_wire())
assert payload.data == "AP8HCQ=="

elements, dtype, shape = decode_tensor(payload)
print("decoded:", elements, dtype, shape)

# ndarray helpers for the same format
arr = np.arange(6, dtype=np.float32).reshape(2, 3)
round_tripped = tensor_to_array(tensor_from_array(arr))
assert (round_tripped == arr).all()
print("f32 ndarray round-trip ok, shape", round_tripped.shape)

# hourly CSV parsing is strict: header row, named columns, hourly spacing
csv = b"""utc_timestamp,load
2018-01-01T00:00:00Z,51000.0
2018-01-01T01:00:00Z,49800.5
2018-01-01T02:00:00Z,48100.25
"""
series = parse_timeseries_csv(csv, "utc_timestamp", "load")
print("parsed series:", series.values)

# render_forecast_csv writes one column per model, repr-exact values


class Stub:
    def __init__(self, model, timestamps, values):
        self.model, self.timestamps, self.values = model, timestamps, values


stub = Stub("Mean", series.timestamps, (50000.0, 50000.0, 50000.0))
print("\nrendered forecast CSV:")
print(render_forecast_csv([stub]).decode(), end="")
