"""CSV readers and writers for loads, weather, holidays and prices."""

from __future__ import annotations

import csv
import logging
import warnings
from collections import defaultdict
from pathlib import Path

import numpy as np

from .types import (
    HOUR,
    WEATHER_COLUMNS,
    DataError,
    HolidayCalendar,
    LoadSeries,
    PriceSeries,
    WeatherSeries,
    to_day,
)

logger = logging.getLogger(__name__)

MAX_FILL_HOURS = 3
RESOLUTIONS = {"30min": 2, "60min": 1}


class GapWarning(UserWarning):
    """Emitted when a household is rejected for a gap longer than the fill limit."""


def _parse_ts(text: str, lineno: int, path) -> np.datetime64:
    try:
        return np.datetime64(text.strip().replace(" ", "T"), "m")
    except ValueError:
        raise DataError(f"{path}:{lineno}: unparseable timestamp {text!r}") from None


def _parse_float(text: str, lineno: int, path, what: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"{path}:{lineno}: unparseable {what} {text!r}") from None
    if not np.isfinite(v):
        raise DataError(f"{path}:{lineno}: non-finite {what}")
    return v


def _rows(path, expected: tuple[str, ...]):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if tuple(header[: len(expected)]) != expected:
            raise DataError(f"{path}:1: expected columns {','.join(expected)}, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(expected):
                raise DataError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}")
            yield lineno, row


def fill_gaps(timestamps: np.ndarray, values: np.ndarray, max_fill: int = MAX_FILL_HOURS):
    """Place observations on a contiguous hourly grid, forward-filling short gaps.

    Returns ``(grid, filled)`` or ``None`` when some gap is longer than ``max_fill`` hours.
    """
    grid = np.arange(timestamps[0], timestamps[-1] + HOUR, dtype="datetime64[h]")
    idx = ((timestamps - grid[0]) // HOUR).astype(np.int64)
    out = np.full(grid.size, np.nan)
    out[idx] = values
    gaps = np.diff(idx) - 1
    if gaps.size and gaps.max() > max_fill:
        return None
    for i in np.flatnonzero(np.isnan(out)):
        out[i] = out[i - 1]
    return grid, out


def load_smart_meter(path, source_resolution: str = "30min") -> list[LoadSeries]:
    """Read ``household_id,timestamp,energy_kWh`` rows into hourly kW series.

    Sub-hourly energies are summed into their clock hour, which at a one-hour
    step is also the mean power in kW. Households whose data contains a gap
    longer than three hours are dropped with a :class:`GapWarning`.
    """
    if source_resolution not in RESOLUTIONS:
        raise DataError(f"source_resolution must be one of {sorted(RESOLUTIONS)}")
    step = 60 // RESOLUTIONS[source_resolution]
    readings: dict[str, dict[np.datetime64, float]] = defaultdict(dict)
    for lineno, row in _rows(path, ("household_id", "timestamp", "energy_kWh")):
        hid = row[0].strip()
        ts = _parse_ts(row[1], lineno, path)
        if int(ts.astype(np.int64)) % step:
            raise DataError(f"{path}:{lineno}: timestamp {ts} off the {source_resolution} grid")
        e = _parse_float(row[2], lineno, path, "energy")
        if e < 0:
            raise DataError(f"{path}:{lineno}: negative energy {e}")
        if ts in readings[hid]:
            raise DataError(f"{path}:{lineno}: duplicate timestamp {ts} for household {hid!r}")
        readings[hid][ts] = e

    out = []
    for hid in sorted(readings):
        stamps = np.array(sorted(readings[hid]), dtype="datetime64[m]")
        energy = np.array([readings[hid][t] for t in stamps])
        hours = stamps.astype("datetime64[h]")
        uniq, inv = np.unique(hours, return_inverse=True)
        hourly = np.zeros(uniq.size)
        np.add.at(hourly, inv, energy)
        filled = fill_gaps(uniq, hourly)
        if filled is None:
            msg = f"household {hid!r} rejected: gap longer than {MAX_FILL_HOURS} h"
            logger.warning(msg)
            warnings.warn(msg, GapWarning, stacklevel=2)
            continue
        out.append(LoadSeries(hid, *filled))
    return out


def load_weather(path) -> WeatherSeries:
    cols = ("timestamp",) + WEATHER_COLUMNS
    stamps, rows = [], []
    for lineno, row in _rows(path, cols):
        stamps.append(_parse_ts(row[0], lineno, path).astype("datetime64[h]"))
        rows.append([_parse_float(v, lineno, path, c) for v, c in zip(row[1:7], WEATHER_COLUMNS)])
    if not stamps:
        raise DataError(f"{path}: no weather rows")
    stamps = np.array(stamps, dtype="datetime64[h]")
    order = np.argsort(stamps, kind="stable")
    stamps, vals = stamps[order], np.array(rows)[order]
    if np.any(np.diff(stamps) == np.timedelta64(0, "h")):
        raise DataError(f"{path}: duplicate weather timestamps")
    grid = np.arange(stamps[0], stamps[-1] + HOUR, dtype="datetime64[h]")
    if grid.size != stamps.size:
        filled = np.empty((grid.size, 6))
        for j in range(6):
            res = fill_gaps(stamps, vals[:, j])
            if res is None:
                raise DataError(f"{path}: weather gap longer than {MAX_FILL_HOURS} h")
            filled[:, j] = res[1]
        vals = filled
    return WeatherSeries(grid, vals)


def load_holidays(path, region: str = "") -> HolidayCalendar:
    dates = set()
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text or text.lower() == "date":
                continue
            try:
                dates.add(to_day(text))
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparseable date {text!r}") from None
    return HolidayCalendar(frozenset(dates), region)


def load_prices(path) -> PriceSeries:
    stamps, prices = [], []
    for lineno, row in _rows(path, ("timestamp", "price_eur_per_kwh")):
        stamps.append(_parse_ts(row[0], lineno, path).astype("datetime64[h]"))
        prices.append(_parse_float(row[1], lineno, path, "price"))
    stamps = np.array(stamps, dtype="datetime64[h]")
    order = np.argsort(stamps, kind="stable")
    return PriceSeries(stamps[order], np.array(prices)[order])


def _fmt_ts(ts) -> str:
    return str(np.datetime64(ts, "h").astype("datetime64[m]"))


def write_loads(path, series: list[LoadSeries]) -> None:
    """Write series in the ingest format (one kWh value per hour)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["household_id", "timestamp", "energy_kWh"])
        for s in series:
            for t, v in zip(s.timestamps, s.values):
                w.writerow([s.id, _fmt_ts(t), repr(float(v))])


def write_weather(path, weather: WeatherSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", *WEATHER_COLUMNS])
        for t, row in zip(weather.timestamps, weather.values):
            w.writerow([_fmt_ts(t), *(repr(float(v)) for v in row)])


def write_holidays(path, calendar: HolidayCalendar) -> None:
    Path(path).write_text("date\n" + "".join(f"{d}\n" for d in sorted(calendar.dates)))


def write_prices(path, prices: PriceSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "price_eur_per_kwh"])
        for t, p in zip(prices.timestamps, prices.prices):
            w.writerow([_fmt_ts(t), repr(float(p))])
