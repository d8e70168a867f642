"""One-day-ahead hourly load forecasting: models, service and UI definition.

Three desk-scale models share one contract (history in, 24 hourly values
out): a ridge-stabilized linear model on lag and hour-of-day features, a
seasonal-naive baseline repeating the last day, and a global-mean baseline.
The linear model's feature vector is

    [y(t-24), y(t-25), y(t-168), onehot(hour(t)) x 24, 1]

which is the smallest set covering daily and weekly seasonality. Weights
solve the ridge normal equations (X'X + lambda*I) w = X'y with lambda = 1e-6
and an unregularized bias.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass
from datetime import timedelta

import numpy as np

from . import __version__
from .codecs import (CodecError, TimeSeries, format_timestamp, parse_timestamp,
                     parse_timeseries_csv, render_forecast_csv)
from .gateway import (FileDownload, LineSeries, PlotLine, UIAppDefinition,
                      UserInputError)
from .schema import (File, InputSchema, MultipleChoice, OutputSchema, Plot,
                     SchemaDescriptor, TimeSeriesCSVFile)
from .service import UNPROCESSABLE, Service, ServiceError, ServiceInfo

MODEL_NAMES = ("Linear", "SeasonalNaive", "Mean")

LAGS = (24, 25, 168)
HORIZON = 24
RIDGE_LAMBDA = 1e-6
N_FEATURES = len(LAGS) + 24 + 1

#: deepest lag plus at least one full target day
MIN_HISTORY = LAGS[-1] + HORIZON
#: the UI additionally holds out the final day for the backtest plot
UI_MIN_HISTORY = MIN_HISTORY + HORIZON

TIME_COLUMN = "utc_timestamp"
VALUE_COLUMN = "load"


class InsufficientHistoryError(ValueError):
    code = "INSUFFICIENT_HISTORY"


@dataclass(frozen=True)
class LinearModelWeights:
    """28 coefficients: 3 lags, 24 hour-of-day indicators, 1 bias."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if len(coeffs) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} coefficients, got {len(coeffs)}")
        if not all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)


@dataclass(frozen=True)
class ForecastResult:
    """One model's 24-hour forecast continuing the input series."""

    model: str
    timestamps: tuple
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def to_wire(self) -> dict:
        return {"model": self.model,
                "timestamps": [format_timestamp(t) for t in self.timestamps],
                "values": list(self.values)}

    @classmethod
    def from_wire(cls, obj: dict) -> "ForecastResult":
        return cls(model=obj["model"],
                   timestamps=tuple(parse_timestamp(t) for t in obj["timestamps"]),
                   values=tuple(obj["values"]))


def _design_matrix(series: TimeSeries) -> tuple[np.ndarray, np.ndarray]:
    """Rows for every t with full lag coverage: t in [168, n)."""
    y = np.asarray(series.values, dtype=np.float64)
    hours = [t.hour for t in series.timestamps]
    n = len(y)
    rows = np.zeros((n - LAGS[-1], N_FEATURES))
    for i, t in enumerate(range(LAGS[-1], n)):
        rows[i, 0] = y[t - 24]
        rows[i, 1] = y[t - 25]
        rows[i, 2] = y[t - 168]
        rows[i, 3 + hours[t]] = 1.0
        rows[i, -1] = 1.0
    return rows, y[LAGS[-1]:]


def _solve_linear_system(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting.

    The hour indicators sum to the bias column, so the normal equations are
    regular only through the ridge term; a fixed elimination order keeps the
    resolved split between bias and indicators reproducible run to run.
    """
    n = len(b)
    m = np.hstack([a.astype(np.float64, copy=True), b.reshape(-1, 1).astype(np.float64)])
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(m[col:, col])))
        if m[pivot_row, col] == 0.0:
            raise np.linalg.LinAlgError("singular system")
        if pivot_row != col:
            m[[col, pivot_row]] = m[[pivot_row, col]]
        factors = m[col + 1:, col] / m[col, col]
        m[col + 1:, col:] -= factors[:, None] * m[col, col:]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (m[i, n] - m[i, i + 1:n] @ x[i + 1:n]) / m[i, i]
    return x


def fit_linear(history: TimeSeries) -> LinearModelWeights:
    """Fit the lag/hour model by ridge-regularized normal equations.

    Needs at least 192 hours (deepest lag of 168 plus one target day). The
    bias stays unregularized: its diagonal entry gets 0 instead of lambda.
    """
    if len(history) < MIN_HISTORY:
        raise InsufficientHistoryError(
            f"linear model needs at least {MIN_HISTORY} hourly values, got {len(history)}")
    x, y = _design_matrix(history)
    # accumulate X'X and X'y row by row: with the indicator/bias overlap the
    # solution is pinned only through lambda, so the summation order must be
    # canonical for the fit to be reproducible against a scalar reference
    a = np.zeros((N_FEATURES, N_FEATURES))
    b = np.zeros(N_FEATURES)
    for row, target in zip(x, y):
        a += np.outer(row, row)
        b += row * target
    ridge = np.full(N_FEATURES, RIDGE_LAMBDA)
    ridge[-1] = 0.0
    a += np.diag(ridge)
    return LinearModelWeights(tuple(_solve_linear_system(a, b)))


def predict_linear(weights: LinearModelWeights, history: TimeSeries, horizon: int = HORIZON) -> list[float]:
    """Iterative multi-step forecast.

    Each step's lags read from the extended series (history plus predictions
    made so far). With the shallowest lag at 24 hours and a 24-hour horizon
    every lag reference lands in actual history; the extension only matters
    for longer horizons.
    """
    if len(history) < LAGS[-1]:
        raise InsufficientHistoryError(
            f"prediction needs at least {LAGS[-1]} hourly values, got {len(history)}")
    w = np.asarray(weights.coefficients)
    extended = list(history.values)
    n = len(extended)
    last = history.timestamps[-1]
    out = []
    for h in range(horizon):
        pos = n + h
        features = np.zeros(N_FEATURES)
        features[0] = extended[pos - 24]
        features[1] = extended[pos - 25]
        features[2] = extended[pos - 168]
        features[3 + (last + timedelta(hours=h + 1)).hour] = 1.0
        features[-1] = 1.0
        value = float(features @ w)
        out.append(value)
        extended.append(value)
    return out


def seasonal_naive_forecast(history: TimeSeries) -> list[float]:
    """Repeat the final observed day: out[h] = y[n - 24 + h]."""
    if len(history) < HORIZON:
        raise InsufficientHistoryError(
            f"seasonal naive needs at least {HORIZON} hourly values, got {len(history)}")
    return [float(v) for v in history.values[-HORIZON:]]


def mean_forecast(history: TimeSeries) -> list[float]:
    """24 copies of the arithmetic mean of the whole history."""
    if len(history) == 0:
        raise InsufficientHistoryError("mean forecast needs a non-empty history")
    return [float(np.mean(history.values))] * HORIZON


def run_model(name: str, history: TimeSeries) -> list[float]:
    """Dispatch one model by catalog name."""
    if name == "Linear":
        return predict_linear(fit_linear(history), history)
    if name == "SeasonalNaive":
        return seasonal_naive_forecast(history)
    if name == "Mean":
        return mean_forecast(history)
    raise ValueError(f"unknown model {name!r}")


def forecast_timestamps(history: TimeSeries, horizon: int = HORIZON):
    """The horizon's hourly timestamps, continuing the input series."""
    last = history.timestamps[-1]
    return [last + timedelta(hours=h + 1) for h in range(horizon)]


class ForecastService(Service):
    """JSON contract: {models, timestamps, values} -> {forecasts: [...]}.

    The linear model is fit on the submitted history at request time, which
    keeps the service stateless and every response deterministic.
    """

    info = ServiceInfo(name="forecast", version=__version__,
                       description="One-day-ahead hourly load forecasting")

    def __init__(self):
        super().__init__()
        self._models = {}

    def load_model(self) -> None:
        self._models = {
            "Linear": lambda history: predict_linear(fit_linear(history), history),
            "SeasonalNaive": seasonal_naive_forecast,
            "Mean": mean_forecast,
        }

    def process(self, request: dict) -> dict:
        extra = set(request) - {"models", "timestamps", "values"}
        if extra:
            raise ServiceError(UNPROCESSABLE, f"unknown request keys: {sorted(extra)}")
        for key in ("models", "timestamps", "values"):
            if key not in request:
                raise ServiceError(UNPROCESSABLE, f"missing request key {key!r}")
        models = request["models"]
        if not isinstance(models, list) or not models:
            raise ServiceError(UNPROCESSABLE, "models must be a non-empty list of model names")
        for name in models:
            if name not in self._models:
                raise ServiceError(UNPROCESSABLE,
                                   f"unknown model {name!r}; supported: {', '.join(MODEL_NAMES)}")
        if not isinstance(request["timestamps"], list) or not isinstance(request["values"], list):
            raise ServiceError(UNPROCESSABLE, "timestamps and values must be lists")
        try:
            history = TimeSeries.from_wire_lists(request["timestamps"], request["values"])
        except CodecError as exc:
            raise ServiceError(UNPROCESSABLE, f"invalid history series: {exc}") from exc
        if len(history) < MIN_HISTORY:
            raise ServiceError(UNPROCESSABLE,
                               f"history must cover at least {MIN_HISTORY} hours, got {len(history)}")

        future = forecast_timestamps(history)
        forecasts = []
        for name in models:
            values = self._models[name](history)
            forecasts.append(ForecastResult(model=name, timestamps=tuple(future),
                                            values=tuple(values)).to_wire())
        return {"forecasts": forecasts}


# UI definition ----------------------------------------------------------------

INPUT_SCHEMA = InputSchema([
    ("models", MultipleChoice(options=MODEL_NAMES, label="Models")),
    ("history", TimeSeriesCSVFile(time_column=TIME_COLUMN, value_column=VALUE_COLUMN,
                                  label="Hourly load history (CSV)")),
])

OUTPUT_SCHEMA = OutputSchema([
    ("forecast_plot", Plot(kind="line", label="Forecast")),
    ("error_plot", Plot(kind="line", label="Forecast error (backtest)")),
    ("forecast_csv", File(label="Forecast CSV", extensions=(".csv",))),
])


def descriptor() -> SchemaDescriptor:
    return SchemaDescriptor(
        app_name="Load Forecast",
        input_schema=INPUT_SCHEMA,
        output_schema=OUTPUT_SCHEMA,
        service_description="Forecast hourly electrical load one day ahead with selectable models.",
    )


def prepare_request(inputs: dict) -> dict:
    """Parse the uploaded CSV and assemble the service request."""
    content = base64.b64decode(inputs["history"]["content_base64"])
    try:
        series = parse_timeseries_csv(content, TIME_COLUMN, VALUE_COLUMN)
    except CodecError as exc:
        raise UserInputError(f"history CSV: {exc}", field_name="history") from exc
    if len(series) < UI_MIN_HISTORY:
        raise UserInputError(
            f"history must cover at least {UI_MIN_HISTORY} hours "
            f"({MIN_HISTORY} to fit plus {HORIZON} held out for the backtest), got {len(series)}",
            field_name="history")
    return {"models": list(inputs["models"]),
            "timestamps": series.timestamp_strings(),
            "values": list(series.values)}


def process_response(request: dict, response: dict) -> list:
    """Two plots and a CSV download.

    The forecast plot shows the last 72 hours of history plus each model's
    forecast. The backtest plot refits every requested model on the history
    minus its final day and shows per-hour absolute error against that
    held-out day; the held-out day is never visible to the refit models.
    """
    history = TimeSeries.from_wire_lists(request["timestamps"], request["values"])
    forecasts = [ForecastResult.from_wire(f) for f in response["forecasts"]]

    recent = min(len(history), 72)
    forecast_series = [LineSeries(label="History",
                                  x=history.timestamp_strings()[-recent:],
                                  y=history.values[-recent:])]
    for f in forecasts:
        forecast_series.append(LineSeries(label=f.model,
                                          x=[format_timestamp(t) for t in f.timestamps],
                                          y=f.values))
    forecast_plot = PlotLine(title="Forecast", series=tuple(forecast_series))

    train = TimeSeries(history.timestamps[:-HORIZON], history.values[:-HORIZON])
    held_out = history.values[-HORIZON:]
    held_out_x = history.timestamp_strings()[-HORIZON:]
    error_series = []
    for name in request["models"]:
        predicted = run_model(name, train)
        errors = [abs(p - a) for p, a in zip(predicted, held_out)]
        error_series.append(LineSeries(label=name, x=held_out_x, y=errors))
    error_plot = PlotLine(title="Forecast error (backtest)", series=tuple(error_series))

    csv_bytes = render_forecast_csv(forecasts)
    download = FileDownload(filename="forecast.csv",
                            content_base64=base64.b64encode(csv_bytes).decode("ascii"),
                            mime="text/csv")
    return [forecast_plot, error_plot, download]


def ui_definition(service_url: str) -> UIAppDefinition:
    return UIAppDefinition(descriptor=descriptor(), service_url=service_url,
                           prepare_request=prepare_request, process_response=process_response)
