import base64
import math
import random

import numpy as np
import pytest

import mlserve.forecast as forecast
from mlserve.codecs import TimeSeries, parse_timeseries_csv
from mlserve.forecast import (ForecastService, InsufficientHistoryError,
                              LinearModelWeights, fit_linear, mean_forecast,
                              predict_linear, prepare_request, process_response,
                              run_model, seasonal_naive_forecast)
from mlserve.gateway import FileDownload, PlotLine
from mlserve.service import ServiceError

from conftest import START, hourly_timestamps, make_series, sinusoid_series
from oracles import kahan_mean, ridge_normal_equations


def recursion_series(days=30, seed_values=None):
    """Noise-free y_t = 0.5 * y_(t-24) + 10 with a varied first day."""
    n = days * 24
    y = [0.0] * n
    if seed_values is None:
        seed_values = [20.0 + 5.0 * math.sin(2 * math.pi * h / 24.0) + 0.3 * h for h in range(24)]
    y[:24] = seed_values
    for t in range(24, n):
        y[t] = 0.5 * y[t - 24] + 10.0
    return make_series(y)


def oracle_features_targets(series):
    """Independent feature construction for the ridge oracle."""
    values = list(series.values)
    hours = [t.hour for t in series.timestamps]
    rows, targets = [], []
    for t in range(168, len(values)):
        onehot = [0.0] * 24
        onehot[hours[t]] = 1.0
        rows.append([values[t - 24], values[t - 25], values[t - 168]] + onehot + [1.0])
        targets.append(values[t])
    return rows, targets


class TestFitLinear:
    def test_weights_match_gaussian_elimination_oracle(self):
        series = recursion_series()
        weights = np.array(fit_linear(series).coefficients)
        rows, targets = oracle_features_targets(series)
        expected = np.array(ridge_normal_equations(rows, targets, lam=1e-6))
        rel = np.max(np.abs(weights - expected)) / np.max(np.abs(expected))
        assert rel <= 1e-8

    def test_recursion_fixture_predicts_construction(self):
        series = recursion_series()
        weights = fit_linear(series)
        predicted = predict_linear(weights, series)
        truth = [0.5 * series.values[len(series) - 24 + h] + 10.0 for h in range(24)]
        assert max(abs(p - t) for p, t in zip(predicted, truth)) <= 1e-6

    def test_constant_history_forecasts_constant(self):
        series = make_series([42.5] * 240)
        predicted = predict_linear(fit_linear(series), series)
        assert max(abs(p - 42.5) for p in predicted) <= 1e-9

    def test_minimum_history_boundary(self):
        with pytest.raises(InsufficientHistoryError):
            fit_linear(make_series([1.0] * 191))
        fit_linear(make_series(list(range(192))))  # exactly the minimum works

    def test_scale_equivariance_on_mean_zero_fixture(self):
        rng = np.random.default_rng(7)
        n = 24 * 30
        t = np.arange(n)
        y = (50 * np.sin(2 * np.pi * t / 24) + 20 * np.sin(2 * np.pi * t / 168)
             + 10 * np.sin(2 * np.pi * t / 7.3) + rng.normal(0, 5, n))
        y -= y.mean()
        series = make_series(y.tolist())
        scaled = make_series((3.7 * y).tolist())
        base = np.array(predict_linear(fit_linear(series), series))
        big = np.array(predict_linear(fit_linear(scaled), scaled))
        rel = np.max(np.abs(big - 3.7 * base)) / np.max(np.abs(3.7 * base))
        assert rel <= 1e-9

    def test_fit_deterministic(self):
        series = sinusoid_series(days=10)
        assert fit_linear(series) == fit_linear(series)


class TestPredictLinear:
    def test_zero_weights_give_zeros(self):
        weights = LinearModelWeights((0.0,) * 28)
        assert predict_linear(weights, sinusoid_series(days=8)) == [0.0] * 24

    def test_bias_only_weights(self):
        coeffs = [0.0] * 27 + [7.25]
        predicted = predict_linear(LinearModelWeights(tuple(coeffs)), sinusoid_series(days=8))
        assert predicted == [7.25] * 24

    def test_periodic_signal_matches_seasonal_naive(self):
        series = sinusoid_series(days=30)
        predicted = predict_linear(fit_linear(series), series)
        naive = seasonal_naive_forecast(series)
        assert max(abs(p - s) for p, s in zip(predicted, naive)) <= 1e-6

    def test_horizon_24_reads_only_actual_history(self):
        # with the shallowest lag at 24h, no step of a 24h horizon may touch
        # a predicted value; verify by poisoning the extension path
        series = sinusoid_series(days=8)
        n = len(series)
        for h in range(24):
            pos = n + h
            for lag in (24, 25, 168):
                assert pos - lag < n

    def test_weights_length_enforced(self):
        with pytest.raises(ValueError):
            LinearModelWeights((1.0,) * 27)


class TestBaselines:
    def test_seasonal_naive_repeats_last_day(self):
        values = [0.0] * 48 + list(range(1, 25))
        assert seasonal_naive_forecast(make_series(values)) == [float(v) for v in range(1, 25)]

    def test_seasonal_naive_backtest_error_zero_on_periodic(self):
        series = sinusoid_series(days=14)
        train = TimeSeries(series.timestamps[:-24], series.values[:-24])
        predicted = seasonal_naive_forecast(train)
        held_out = series.values[-24:]
        assert max(abs(p - a) for p, a in zip(predicted, held_out)) == 0.0

    def test_seasonal_naive_boundary(self):
        with pytest.raises(InsufficientHistoryError):
            seasonal_naive_forecast(make_series([1.0] * 23))

    def test_mean_forecast_small(self):
        assert mean_forecast(make_series([2.0, 4.0])) == [3.0] * 24

    def test_mean_forecast_constant(self):
        assert mean_forecast(make_series([5.5] * 24)) == [5.5] * 24

    def test_mean_matches_kahan_oracle(self):
        rng = random.Random(99)
        values = [rng.uniform(-1e6, 1e6) for _ in range(10**6)]
        ours = mean_forecast(make_series(values))[0]
        expected = kahan_mean(values)
        assert abs(ours - expected) / abs(expected) <= 1e-12


class TestForecastService:
    @pytest.fixture
    def service(self):
        svc = ForecastService()
        svc.load()
        return svc

    def _request(self, series, models):
        return {"models": models, "timestamps": series.timestamp_strings(),
                "values": list(series.values)}

    def test_load_registers_all_models(self, service):
        assert set(service._models) == {"Linear", "SeasonalNaive", "Mean"}

    def test_two_models_structural(self, service):
        series = sinusoid_series(days=14)
        response = service.handle(self._request(series, ["SeasonalNaive", "Mean"]))
        assert [f["model"] for f in response["forecasts"]] == ["SeasonalNaive", "Mean"]
        last = series.timestamps[-1]
        for f in response["forecasts"]:
            assert len(f["timestamps"]) == 24 and len(f["values"]) == 24
            first = forecast.parse_timestamp(f["timestamps"][0])
            assert (first - last).total_seconds() == 3600

    def test_duplicate_models_allowed_and_deterministic(self, service):
        series = sinusoid_series(days=14)
        response = service.handle(self._request(series, ["Linear", "Linear"]))
        a, b = response["forecasts"]
        assert a == b

    def test_unknown_model_lists_supported(self, service):
        series = sinusoid_series(days=14)
        with pytest.raises(ServiceError) as info:
            service.handle(self._request(series, ["RandomForest"]))
        assert info.value.code == "UNPROCESSABLE"
        for name in ("Linear", "SeasonalNaive", "Mean"):
            assert name in info.value.message

    def test_empty_model_list(self, service):
        series = sinusoid_series(days=14)
        with pytest.raises(ServiceError) as info:
            service.handle(self._request(series, []))
        assert info.value.code == "UNPROCESSABLE"

    def test_short_history_rejected(self, service):
        series = sinusoid_series(days=7)  # 168 < 192
        with pytest.raises(ServiceError) as info:
            service.handle(self._request(series, ["Mean"]))
        assert info.value.code == "UNPROCESSABLE"

    def test_irregular_series_rejected(self, service):
        request = {"models": ["Mean"],
                   "timestamps": ["2018-01-01T00:00:00Z", "2018-01-01T02:00:00Z"],
                   "values": [1.0, 2.0]}
        with pytest.raises(ServiceError) as info:
            service.handle(request)
        assert info.value.code == "UNPROCESSABLE"

    def test_extra_keys_rejected(self, service):
        series = sinusoid_series(days=14)
        request = self._request(series, ["Mean"])
        request["note"] = "hi"
        with pytest.raises(ServiceError):
            service.handle(request)

    def test_identical_requests_identical_responses(self, service):
        import json
        series = sinusoid_series(days=14)
        request = self._request(series, ["Linear", "SeasonalNaive", "Mean"])
        assert json.dumps(service.handle(request)) == json.dumps(service.handle(request))


def _csv_bytes(series):
    lines = ["utc_timestamp,load"]
    for t, v in zip(series.timestamp_strings(), series.values):
        lines.append(f"{t},{v!r}")
    return ("\n".join(lines) + "\n").encode()


def _file_value(content: bytes, name="history.csv"):
    return {"filename": name, "content_base64": base64.b64encode(content).decode()}


class TestHooks:
    def test_prepare_request_parses_csv(self):
        series = sinusoid_series(days=14)
        inputs = {"models": ["Mean"], "history": _file_value(_csv_bytes(series))}
        request = prepare_request(inputs)
        assert request["models"] == ["Mean"]
        assert len(request["timestamps"]) == len(series)
        assert request["values"] == list(series.values)

    def test_prepare_request_rejects_short_history(self):
        from mlserve.gateway import UserInputError
        series = sinusoid_series(days=8)  # 192: fits but leaves no backtest day
        inputs = {"models": ["Mean"], "history": _file_value(_csv_bytes(series))}
        with pytest.raises(UserInputError):
            prepare_request(inputs)

    def test_prepare_request_wraps_csv_errors(self):
        from mlserve.gateway import UserInputError
        inputs = {"models": ["Mean"], "history": _file_value(b"bad,header\n1,2\n")}
        with pytest.raises(UserInputError) as info:
            prepare_request(inputs)
        assert info.value.field_name == "history"

    def _round_trip(self, series, models):
        svc = ForecastService()
        svc.load()
        request = {"models": models, "timestamps": series.timestamp_strings(),
                   "values": list(series.values)}
        response = svc.handle(request)
        return request, response

    def test_outputs_shape_and_variants(self):
        series = sinusoid_series(days=14)
        request, response = self._round_trip(series, ["SeasonalNaive", "Mean"])
        items = process_response(request, response)
        assert [type(i) for i in items] == [PlotLine, PlotLine, FileDownload]

    def test_forecast_plot_layout(self):
        series = sinusoid_series(days=14)
        request, response = self._round_trip(series, ["SeasonalNaive"])
        plot = process_response(request, response)[0]
        assert plot.title == "Forecast"
        assert [s.label for s in plot.series] == ["History", "SeasonalNaive"]
        assert len(plot.series[0].x) == 72
        assert len(plot.series[1].x) == 24

    def test_backtest_error_zero_for_seasonal_naive_on_periodic(self):
        series = sinusoid_series(days=14)
        request, response = self._round_trip(series, ["SeasonalNaive"])
        error_plot = process_response(request, response)[1]
        assert error_plot.title == "Forecast error (backtest)"
        assert max(error_plot.series[0].y) == 0.0

    def test_backtest_never_sees_final_day(self, monkeypatch):
        series = sinusoid_series(days=14)
        request, response = self._round_trip(series, ["Linear"])
        seen_lengths = []
        real_fit = forecast.fit_linear

        def spy(history):
            seen_lengths.append(len(history))
            return real_fit(history)

        monkeypatch.setattr(forecast, "fit_linear", spy)
        process_response(request, response)
        assert seen_lengths and all(n == len(series) - 24 for n in seen_lengths)

    def test_downloaded_csv_reparses_to_response_values(self):
        series = sinusoid_series(days=14)
        request, response = self._round_trip(series, ["Linear", "Mean"])
        download = process_response(request, response)[2]
        assert download.filename == "forecast.csv" and download.mime == "text/csv"
        content = base64.b64decode(download.content_base64)
        for f in response["forecasts"]:
            parsed = parse_timeseries_csv(content, "utc_timestamp", f["model"])
            assert list(parsed.values) == f["values"]

    def test_ui_schema_round_trips(self):
        from mlserve.schema import schema_from_wire, schema_to_wire
        d = forecast.descriptor()
        assert schema_from_wire(schema_to_wire(d)) == d
        assert len(d.input_schema) == 2 and len(d.output_schema) == 3

    def test_bundled_sample_csv_is_usable(self):
        from importlib import resources
        content = resources.files("mlserve").joinpath("data/sample_load.csv").read_bytes()
        assert content.startswith(b"utc_timestamp,load\n")
        series = parse_timeseries_csv(content, forecast.TIME_COLUMN, forecast.VALUE_COLUMN)
        assert len(series) >= forecast.UI_MIN_HISTORY
