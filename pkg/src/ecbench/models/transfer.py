"""Synthetic pretraining data aligned with a target community."""

from __future__ import annotations

import numpy as np

from ..data.types import HOUR, HolidayCalendar, WeatherSeries
from ..features import Dataset, build_window, earliest_buildable_day
from ..synthgen import SyntheticSpec, annual_energy_for_mean, generate_profile


def synthetic_pretraining_set(
    target: Dataset,
    weather: WeatherSeries,
    calendar: HolidayCalendar | None = None,
    start=None,
    stop=None,
    profile_type: str = "household",
) -> Dataset:
    """Standard-load-profile windows over ``[start, stop)`` (default: the weather range).

    The profile is scaled so that its yearly mean power equals the mean
    target load of ``target``; windows share ``target.scaler``.
    """
    start = weather.start if start is None else start
    stop = weather.end + HOUR if stop is None else stop
    mean_kw = float(np.mean(target.y))
    if not mean_kw > 0:
        raise ValueError(f"target mean load must be positive for scaling, got {mean_kw}")
    spec = SyntheticSpec(profile_type, str(start), str(stop), annual_energy_for_mean(mean_kw),
                         calendar or HolidayCalendar())  # fmt: skip
    load = generate_profile(spec)
    first = earliest_buildable_day(load, weather)
    last = (min(load.end, weather.end) - 23 * HOUR).astype("datetime64[D]")  # last complete day
    days = np.arange(first, last + 1)
    windows = [build_window(d, load, weather, calendar) for d in days]
    return Dataset.from_windows(windows, scaler=target.scaler)
