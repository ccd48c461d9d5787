"""Hourly time-series containers shared by every stage of the pipeline.

All timestamps are timezone-naive local time stored as ``datetime64[h]``.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

HOUR = np.timedelta64(1, "h")

WEATHER_COLUMNS = (
    "temperature",
    "dew_point",
    "wind_direction",
    "wind_speed",
    "pressure",
    "humidity",
)


class DataError(ValueError):
    """Raised when input data violates a series or file contract."""


def to_hour(value) -> np.datetime64:
    return np.datetime64(value, "h")


def to_day(value) -> np.datetime64:
    if isinstance(value, dt.datetime):
        value = value.date()
    return np.datetime64(value, "D")


def _check_grid(timestamps: np.ndarray, what: str) -> np.ndarray:
    ts = np.asarray(timestamps).astype("datetime64[h]")
    if ts.ndim != 1:
        raise DataError(f"{what}: timestamps must be one-dimensional")
    if ts.size > 1:
        steps = np.diff(ts).astype(np.int64)
        bad = np.flatnonzero(steps != 1)
        if bad.size:
            i = int(bad[0])
            raise DataError(
                f"{what}: timestamps must advance in 1-hour steps "
                f"(found {ts[i]} -> {ts[i + 1]})"
            )
    return ts


class _HourlyGrid:
    """Mixin with index arithmetic over a contiguous hourly grid."""

    timestamps: np.ndarray

    @property
    def start(self) -> np.datetime64:
        return self.timestamps[0]

    @property
    def end(self) -> np.datetime64:
        """Last covered hour (inclusive)."""
        return self.timestamps[-1]

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def index_of(self, ts) -> int:
        i = int((to_hour(ts) - self.start) // HOUR)
        if i < 0 or i >= len(self):
            raise KeyError(f"{to_hour(ts)} outside [{self.start}, {self.end}]")
        return i

    def covers(self, first, last) -> bool:
        """True when every hour in ``[first, last]`` is on the grid."""
        return bool(len(self)) and to_hour(first) >= self.start and to_hour(last) <= self.end


@dataclass(frozen=True, eq=False)
class LoadSeries(_HourlyGrid):
    """Hourly mean power (kW) of a household, community or synthetic profile."""

    id: str
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = _check_grid(self.timestamps, f"load {self.id!r}")
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != ts.shape:
            raise DataError(
                f"load {self.id!r}: {vals.size} values for {ts.size} timestamps"
            )
        if not np.all(np.isfinite(vals)):
            raise DataError(f"load {self.id!r}: non-finite values")
        if np.any(vals < 0):
            raise DataError(f"load {self.id!r}: negative power")
        ts.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

    def window(self, first, n_hours: int) -> np.ndarray:
        i = self.index_of(first)
        if i + n_hours > len(self):
            raise KeyError(f"{n_hours} h from {to_hour(first)} exceeds {self.end}")
        return self.values[i : i + n_hours]

    def slice(self, first, stop) -> "LoadSeries":
        """Sub-series over ``[first, stop)``."""
        i, j = self.index_of(first), self.index_of(to_hour(stop) - HOUR) + 1
        return LoadSeries(self.id, self.timestamps[i:j], self.values[i:j])

    def scaled(self, factor: float, id: str | None = None) -> "LoadSeries":
        return LoadSeries(id or self.id, self.timestamps, self.values * factor)


@dataclass(frozen=True, eq=False)
class WeatherSeries(_HourlyGrid):
    """Six hourly weather columns, in :data:`WEATHER_COLUMNS` order."""

    timestamps: np.ndarray
    values: np.ndarray  # (n_hours, 6)
    columns: tuple = WEATHER_COLUMNS

    def __post_init__(self):
        ts = _check_grid(self.timestamps, "weather")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] != 6:
            raise DataError(f"weather: expected (n, 6) values, got {vals.shape}")
        if vals.shape[0] != ts.size:
            raise DataError(f"weather: {vals.shape[0]} rows for {ts.size} timestamps")
        if not np.all(np.isfinite(vals)):
            raise DataError("weather: non-finite values")
        hum = vals[:, WEATHER_COLUMNS.index("humidity")]
        if np.any((hum < 0) | (hum > 100)):
            raise DataError("weather: relative humidity outside [0, 100]")
        ts.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "columns", tuple(self.columns))

    def window(self, first, n_hours: int) -> np.ndarray:
        i = self.index_of(first)
        if i + n_hours > len(self):
            raise KeyError(f"{n_hours} h from {to_hour(first)} exceeds {self.end}")
        return self.values[i : i + n_hours]


@dataclass(frozen=True, eq=False)
class PriceSeries(_HourlyGrid):
    """Hourly energy price in EUR/kWh; negative prices are allowed."""

    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        ts = _check_grid(self.timestamps, "prices")
        p = np.asarray(self.prices, dtype=float)
        if p.shape != ts.shape:
            raise DataError(f"prices: {p.size} values for {ts.size} timestamps")
        if not np.all(np.isfinite(p)):
            raise DataError("prices: non-finite values")
        ts.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", p)

    def window(self, first, n_hours: int) -> np.ndarray:
        i = self.index_of(first)
        if i + n_hours > len(self):
            raise KeyError(f"{n_hours} h from {to_hour(first)} exceeds {self.end}")
        return self.prices[i : i + n_hours]


@dataclass(frozen=True)
class HolidayCalendar:
    dates: frozenset = field(default_factory=frozenset)
    region: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "dates", frozenset(to_day(d) for d in self.dates)
        )

    def __contains__(self, day) -> bool:
        return to_day(day) in self.dates


@dataclass(frozen=True, eq=False)
class CommunityProfile:
    household_ids: tuple
    aggregate: LoadSeries

    @property
    def size(self) -> int:
        return len(self.household_ids)


@dataclass(frozen=True)
class DataSplit:
    """Train range immediately followed by a test quarter; ranges are ``[start, stop)``."""

    train_start: np.datetime64
    train_stop: np.datetime64
    test_start: np.datetime64
    test_stop: np.datetime64
    test_quarter: int
    test_year: int
    train_months: int

    def __post_init__(self):
        if self.train_stop != self.test_start:
            raise DataError("train range must end where the test range starts")

    @property
    def train_days(self) -> np.ndarray:
        return np.arange(to_day(self.train_start), to_day(self.train_stop))

    @property
    def test_days(self) -> np.ndarray:
        return np.arange(to_day(self.test_start), to_day(self.test_stop))
