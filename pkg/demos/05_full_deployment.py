"""The full two-process topology in one script: REST service + UI gateway.

Starts the forecast service and its gateway on local ports, then plays the
browser's role: fetch the schema, submit a CSV upload, read the display
items back. Ctrl-C-free: everything is torn down at the end.
"""

import base64
from importlib import resources

import requests

from mlserve import GatewayServer, RestServer, ServerConfig
from mlserve.forecast import ForecastService, ui_definition

# the service process: POST /api/process, GET /health
server = RestServer(ForecastService(), ServerConfig(bind_port=18100, workers=2))
server.start()
service_url = f"http://127.0.0.1:{server.port}"
print("service:", requests.get(service_url + "/health", timeout=5).json())

# the gateway process: GET /ui/schema, POST /ui/submit, static frontend
gateway = GatewayServer(ui_definition(service_url), port=18101)
gateway.start()
gateway_url = f"http://127.0.0.1:{gateway.port}"

schema = requests.get(gateway_url + "/ui/schema", timeout=5).json()
print("\nschema inputs:", [(e["name"], e["type"]) for e in schema["inputs"]])
print("schema outputs:", [(e["name"], e["type"]) for e in schema["outputs"]])

# submit exactly what the browser would send: choices + base64 file upload
csv_bytes = resources.files("mlserve").joinpath("data/sample_load.csv").read_bytes()
submission = {
    "models": ["Linear", "SeasonalNaive", "Mean"],
    "history": {"filename": "sample_load.csv",
                "content_base64": base64.b64encode(csv_bytes).decode()},
}
result = requests.post(gateway_url + "/ui/submit", json=submission, timeout=60)
outputs = result.json()["outputs"]
print(f"\nsubmit -> HTTP {result.status_code}, {len(outputs)} display items:")
for item in outputs:
    if item["type"] == "PlotLine":
        labels = [s["label"] for s in item["series"]]
        print(f"  PlotLine     {item['title']!r} with series {labels}")
    elif item["type"] == "FileDownload":
        size = len(base64.b64decode(item["content_base64"]))
        print(f"  FileDownload {item['filename']!r} ({size} bytes, {item['mime']})")

# a headless client can skip the gateway entirely and hit the service;
# contract violations come back as structured error envelopes
direct = requests.post(service_url + "/api/process",
                       json={"models": ["Mean"]}, timeout=5)
print("\nmalformed direct call ->", direct.status_code, direct.json()["error"]["code"])

gateway.stop()
server.stop()
print("\nshut down cleanly")
