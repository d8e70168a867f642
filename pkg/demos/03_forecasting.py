"""One-day-ahead load forecasting on the bundled sample data.

Runs all three models on the packaged 28-day synthetic load series and
backtests them against the final held-out day.
"""

from importlib import resources

from mlserve import TimeSeries, parse_timeseries_csv
from mlserve.forecast import ForecastService, run_model

content = resources.files("mlserve").joinpath("data/sample_load.csv").read_bytes()
series = parse_timeseries_csv(content, "utc_timestamp", "load")
print(f"history: {len(series)} hours, "
      f"{series.timestamps[0]:%Y-%m-%d} .. {series.timestamps[-1]:%Y-%m-%d}")

# backtest: refit on everything but the last day, compare against it
train = TimeSeries(series.timestamps[:-24], series.values[:-24])
held_out = series.values[-24:]
print("\nmean absolute error on the held-out final day:")
for name in ("Linear", "SeasonalNaive", "Mean"):
    predicted = run_model(name, train)
    mae = sum(abs(p - a) for p, a in zip(predicted, held_out)) / 24
    print(f"  {name:14s} {mae:10.1f}")

# the service wraps the same models behind the JSON contract
service = ForecastService()
service.load()
response = service.handle({
    "models": ["Linear", "SeasonalNaive"],
    "timestamps": series.timestamp_strings(),
    "values": list(series.values),
})
print("\nservice response, first three hours per model:")
for f in response["forecasts"]:
    preview = ", ".join(f"{v:.0f}" for v in f["values"][:3])
    print(f"  {f['model']:14s} {f['timestamps'][0]}  [{preview}, ...]")
