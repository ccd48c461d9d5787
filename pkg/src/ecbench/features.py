"""Day-ahead model inputs: one 24 x 20 feature window per forecast day.

Column layout (fixed):

====== =====================================================
 0-6    day of week one-hot, Monday..Sunday (holidays -> Sunday)
 7, 8   hour of day, sin / cos
 9, 10  day of year, sin / cos (period = days in that year)
 11-13  load at t-168 h, t-336 h, t-504 h (kW)
 14-19  weather at t-24 h, in ``WEATHER_COLUMNS`` order
====== =====================================================
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .data.types import (
    HOUR,
    WEATHER_COLUMNS,
    CommunityProfile,
    DataError,
    DataSplit,
    HolidayCalendar,
    LoadSeries,
    WeatherSeries,
    to_day,
)

N_HOURS = 24
N_FEATURES = 20
LAGS = (168, 336, 504)
MAX_LAG = max(LAGS)
LAG_DAYS = MAX_LAG // 24

DOW = slice(0, 7)
HOUR_SIN, HOUR_COS = 7, 8
DOY_SIN, DOY_COS = 9, 10
LAG_COLS = (11, 12, 13)
WEATHER = slice(14, 20)

FEATURE_NAMES = (
    "mon", "tue", "wed", "thu", "fri", "sat", "sun",
    "hour_sin", "hour_cos", "doy_sin", "doy_cos",
    "load_lag_1w", "load_lag_2w", "load_lag_3w",
    *WEATHER_COLUMNS,
)  # fmt: skip


def encode_day_of_week(day, calendar: HolidayCalendar | None = None) -> np.ndarray:
    d = to_day(day)
    idx = 6 if calendar is not None and d in calendar else int((d.astype(np.int64) + 3) % 7)
    out = np.zeros(7)
    out[idx] = 1.0
    return out


def encode_cyclic(value, period) -> tuple[float, float]:
    if period <= 0:
        raise ValueError("period must be positive")
    angle = 2 * np.pi * np.asarray(value, dtype=float) / period
    return np.sin(angle), np.cos(angle)


def days_in_year(day) -> int:
    y = to_day(day).astype("datetime64[Y]")
    return int(((y + 1).astype("datetime64[D]") - y.astype("datetime64[D]")).astype(int))


def earliest_buildable_day(load: LoadSeries, weather: WeatherSeries) -> np.datetime64:
    first = max(load.start + MAX_LAG * HOUR, weather.start + 24 * HOUR)
    day = first.astype("datetime64[D]")
    return day if day.astype("datetime64[h]") == first else day + 1


@dataclass(frozen=True, eq=False)
class FeatureWindow:
    day: np.datetime64
    X: np.ndarray  # (24, 20)
    y: np.ndarray | None  # (24,) kW, None when the day is not yet observed


def build_window(
    day,
    load: LoadSeries,
    weather: WeatherSeries,
    calendar: HolidayCalendar | None = None,
    require_target: bool = True,
) -> FeatureWindow:
    """Assemble the feature matrix for one forecast day from past data only."""
    day = to_day(day)
    t0 = day.astype("datetime64[h]")
    if not load.covers(t0 - MAX_LAG * HOUR, t0 - (min(LAGS) - 23) * HOUR) or not weather.covers(
        t0 - 24 * HOUR, t0 - HOUR
    ):
        raise DataError(
            f"not enough history for {day}; earliest buildable day is "
            f"{earliest_buildable_day(load, weather)}"
        )
    X = np.empty((N_HOURS, N_FEATURES))
    X[:, DOW] = encode_day_of_week(day, calendar)
    X[:, HOUR_SIN], X[:, HOUR_COS] = encode_cyclic(np.arange(N_HOURS), 24)
    doy = int((day - day.astype("datetime64[Y]").astype("datetime64[D]")).astype(int))
    X[:, DOY_SIN], X[:, DOY_COS] = encode_cyclic(doy, days_in_year(day))
    for col, lag in zip(LAG_COLS, LAGS):
        X[:, col] = load.window(t0 - lag * HOUR, N_HOURS)
    X[:, WEATHER] = weather.window(t0 - 24 * HOUR, N_HOURS)
    y = None
    if load.covers(t0, t0 + 23 * HOUR):
        y = load.window(t0, N_HOURS).copy()
    elif require_target:
        raise DataError(f"load does not cover the target day {day}")
    return FeatureWindow(day, X, y)


class FeatureScaler(TransformerMixin, BaseEstimator):
    """Per-column z-score over (n_windows, 24, 20) arrays; one-hot columns pass through."""

    def __init__(self, passthrough=tuple(range(7))):
        self.passthrough = passthrough

    def fit(self, X, y=None):
        X = _check_windows(X)
        flat = X.reshape(-1, X.shape[-1])
        mean = flat.mean(axis=0)
        std = flat.std(axis=0)
        std[~(std > 1e-12)] = 1.0
        keep = list(self.passthrough)
        mean[keep] = 0.0
        std[keep] = 1.0
        self.mean_, self.scale_ = mean, std
        return self

    def transform(self, X):
        check_is_fitted(self, "mean_")
        X = _check_windows(X)
        return (X - self.mean_) / self.scale_

    def inverse_transform(self, X):
        check_is_fitted(self, "mean_")
        return np.asarray(X, dtype=float) * self.scale_ + self.mean_


def _check_windows(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 3 or X.shape[1:] != (N_HOURS, N_FEATURES):
        raise ValueError(f"expected windows of shape (n, {N_HOURS}, {N_FEATURES}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("windows contain non-finite values")
    return X


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered feature windows; ``X`` is raw, ``X_scaled`` uses the training statistics."""

    days: np.ndarray
    X: np.ndarray  # (n, 24, 20)
    y: np.ndarray  # (n, 24) kW
    scaler: FeatureScaler

    def __len__(self) -> int:
        return int(self.days.size)

    @property
    def X_scaled(self) -> np.ndarray:
        return self.scaler.transform(self.X)

    @classmethod
    def from_windows(cls, windows, scaler: FeatureScaler | None = None) -> "Dataset":
        X = np.stack([w.X for w in windows])
        y = np.stack([w.y for w in windows])
        days = np.array([w.day for w in windows], dtype="datetime64[D]")
        return cls(days, X, y, scaler or FeatureScaler().fit(X))

    def subset(self, idx) -> "Dataset":
        return Dataset(self.days[idx], self.X[idx], self.y[idx], self.scaler)


def build_dataset(
    split: DataSplit,
    community: CommunityProfile | LoadSeries,
    weather: WeatherSeries,
    calendar: HolidayCalendar | None = None,
) -> tuple[Dataset, Dataset]:
    """Train and test windows for one community under ``split``.

    The first three weeks of the train range are skipped so that lag
    features never reach before the training data; test-day lags may reach
    into the train range.
    """
    load = community.aggregate if isinstance(community, CommunityProfile) else community
    train_days = split.train_days[LAG_DAYS:]
    if train_days.size == 0:
        raise DataError(
            f"{split.train_months}-month train range leaves no windows after "
            f"dropping {LAG_DAYS} lag days"
        )
    train_w = [build_window(d, load, weather, calendar) for d in train_days]
    test_w = [build_window(d, load, weather, calendar) for d in split.test_days]
    train = Dataset.from_windows(train_w)
    test = Dataset.from_windows(test_w, scaler=train.scaler)
    return train, test


def dump_dataset(path, dataset: Dataset, scaled: bool = False) -> None:
    """One CSV row per window-hour: day, hour, 20 feature columns, target."""
    X = dataset.X_scaled if scaled else dataset.X
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["day", "hour", *FEATURE_NAMES, "target_kw"])
        for day, xs, ys in zip(dataset.days, X, dataset.y):
            for h in range(N_HOURS):
                w.writerow([str(day), h, *(repr(float(v)) for v in xs[h]), repr(float(ys[h]))])
