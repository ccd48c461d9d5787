"""Seeded stand-ins for the smart-meter and weather inputs.

The real household and weather records are not redistributable, so desk-scale
experiments and tests run on these generators instead. Household load reacts
to the temperature 24 h earlier (thermal inertia), which keeps the weather
signal visible to a forecaster that only sees past weather.
"""

from __future__ import annotations

import numpy as np

from .types import HOUR, HolidayCalendar, LoadSeries, WeatherSeries, to_hour


def _ar1(rng, n, phi, sd):
    out = np.empty(n)
    x = 0.0
    innov = rng.standard_normal(n) * sd * np.sqrt(1 - phi * phi)
    for i in range(n):
        x = phi * x + innov[i]
        out[i] = x
    return out


def _daily_to_hourly(daily: np.ndarray, n_hours: int) -> np.ndarray:
    """Linearly interpolate day-level values placed at noon onto hours."""
    t = np.arange(n_hours)
    knots = np.arange(daily.size) * 24 + 12
    return np.interp(t, knots, daily)


def synthetic_weather(start, stop, seed: int = 0) -> WeatherSeries:
    """London-like hourly weather over ``[start, stop)``."""
    ts = np.arange(to_hour(start), to_hour(stop), dtype="datetime64[h]")
    n = ts.size
    rng = np.random.default_rng(seed)
    day = ts.astype("datetime64[D]")
    doy = (day - day.astype("datetime64[Y]")).astype(int)
    hour = (ts - day).astype(int)
    n_days = n // 24 + 2

    anomaly = _daily_to_hourly(_ar1(rng, n_days, 0.7, 3.0), n)
    temp = (
        10.5
        + 7.5 * np.sin(2 * np.pi * (doy - 110) / 365.25)
        + 3.0 * np.sin(2 * np.pi * (hour - 9) / 24)
        + anomaly
        + 0.4 * rng.standard_normal(n)
    )
    spread = 2.0 + 4.0 * np.abs(np.sin(2 * np.pi * (hour - 3) / 24)) + np.abs(_ar1(rng, n, 0.9, 1.0))
    dew = temp - spread
    a, b = 17.625, 243.04
    humidity = np.clip(100 * np.exp(a * dew / (b + dew) - a * temp / (b + temp)), 0, 100)
    wind_speed = np.abs(14 + _ar1(rng, n, 0.95, 7.0))
    wind_dir = np.mod(220 + np.cumsum(rng.standard_normal(n) * 8.0), 360)
    pressure = 1013 + _daily_to_hourly(_ar1(rng, n_days, 0.8, 9.0), n)
    values = np.column_stack([temp, dew, wind_dir, wind_speed, pressure, humidity])
    return WeatherSeries(ts, values)


# Peaks (hour, width, weight) used to compose individual daily routines.
_MORNING = (7.5, 1.5)
_MIDDAY = (12.5, 2.0)
_EVENING = (19.0, 2.5)


def _bump(hours, centre, width):
    d = np.minimum(np.abs(hours - centre), 24 - np.abs(hours - centre))
    return np.exp(-0.5 * (d / width) ** 2)


def synthetic_households(
    n: int,
    weather: WeatherSeries,
    calendar: HolidayCalendar | None = None,
    seed: int = 0,
    heating: float = 0.06,
    noise_cv: float = 0.6,
    id_prefix: str = "hh",
) -> list[LoadSeries]:
    """Independent household loads (kW) on the weather grid.

    Each household has its own base level, daily routine and heating
    sensitivity; hourly gamma noise with coefficient of variation
    ``noise_cv`` shrinks relative to the mean when households are summed.
    The first 24 hours reuse the first temperature reading as their lag.
    """
    calendar = calendar or HolidayCalendar()
    rng = np.random.default_rng(seed)
    ts = weather.timestamps
    day = ts.astype("datetime64[D]")
    hour = (ts - day).astype(int).astype(float)
    weekday = ((day.astype(np.int64) + 3) % 7)  # 1970-01-01 was a Thursday
    off = (weekday >= 5) | np.isin(day, np.array(sorted(calendar.dates), dtype="datetime64[D]"))
    temp = weather.values[:, 0]
    lagged = np.concatenate([np.full(24, temp[0]), temp[:-24]])
    cold = np.maximum(0.0, 15.5 - lagged)

    out = []
    for i in range(n):
        level = rng.lognormal(np.log(0.35), 0.35)
        w = rng.dirichlet([2.0, 1.0, 3.0])
        shift = rng.normal(0, 0.7)
        work = (
            w[0] * _bump(hour, _MORNING[0] + shift, _MORNING[1])
            + w[1] * _bump(hour, _MIDDAY[0] + shift, _MIDDAY[1])
            + w[2] * _bump(hour, _EVENING[0] + shift, _EVENING[1])
        )
        rest = (
            0.5 * w[0] * _bump(hour, _MORNING[0] + 2 + shift, 2.0)
            + (w[1] + 0.3) * _bump(hour, _MIDDAY[0] + shift, 2.5)
            + w[2] * _bump(hour, _EVENING[0] + shift, _EVENING[1])
        )
        routine = 0.35 + np.where(off, rest, work)
        sens = heating * rng.lognormal(0, 0.3)
        mean = level * routine * (1 + sens * cold)
        k = 1.0 / noise_cv**2
        noisy = mean * rng.gamma(k, 1.0 / k, size=mean.size)
        out.append(LoadSeries(f"{id_prefix}{i:04d}", ts, noisy))
    return out


def weekly_periodic(start, n_weeks: int, seed: int = 0, id: str = "periodic") -> LoadSeries:
    """Noise-free load repeating an identical week."""
    rng = np.random.default_rng(seed)
    week = 0.5 + rng.random(168)
    ts = np.arange(n_weeks * 168) * HOUR + to_hour(start)
    return LoadSeries(id, ts, np.tile(week, n_weeks))
