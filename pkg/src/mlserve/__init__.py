"""mlserve: deploy model-inference services behind a JSON REST interface
with a schema-driven web UI.

A service implements load_model and process; the REST server exposes it at
POST /api/process with bounded-concurrency admission; the UI gateway hosts a
generic frontend, validates submissions against the declared input schema,
and relays to the service. Two reference apps ship with the package: hourly
load forecasting (mlserve.forecast) and cell instance segmentation
(mlserve.segment).
"""

__version__ = "0.1.0"

from .codecs import (CodecError, TensorPayload, TimeSeries, decode_tensor,
                     encode_tensor, parse_timeseries_csv, render_forecast_csv,
                     tensor_from_array, tensor_to_array)
from .schema import (CSVFile, File, ImageFile, InputSchema, MultipleChoice,
                     Number, OutputSchema, Plot, Range, SchemaDescriptor,
                     SchemaParseError, SingleChoice, Text, TextLong,
                     TimeSeriesCSVFile, ValidationReport, schema_from_wire,
                     schema_to_wire, validate_input)
from .service import (LoadFailure, Service, ServiceError, ServiceInfo)
from .server import RestServer, ServerConfig, WorkerPool
from .gateway import (FileDownload, GatewayServer, LineSeries, NumberDisplay,
                      PlotImage, PlotLine, TextDisplay, UIAppDefinition,
                      UserInputError)

__all__ = [
    "__version__",
    "CodecError", "TensorPayload", "TimeSeries", "decode_tensor", "encode_tensor",
    "parse_timeseries_csv", "render_forecast_csv", "tensor_from_array", "tensor_to_array",
    "CSVFile", "File", "ImageFile", "InputSchema", "MultipleChoice", "Number",
    "OutputSchema", "Plot", "Range", "SchemaDescriptor", "SchemaParseError",
    "SingleChoice", "Text", "TextLong", "TimeSeriesCSVFile", "ValidationReport",
    "schema_from_wire", "schema_to_wire", "validate_input",
    "LoadFailure", "Service", "ServiceError", "ServiceInfo",
    "RestServer", "ServerConfig", "WorkerPool",
    "FileDownload", "GatewayServer", "LineSeries", "NumberDisplay", "PlotImage",
    "PlotLine", "TextDisplay", "UIAppDefinition", "UserInputError",
]
