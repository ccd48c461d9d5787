"""Synthetic standard load profiles for pretraining.

A profile is a tabulated 24-hour shape per (season, day class), optionally
modulated by a smooth day-of-year polynomial (household type), and scaled
so that each calendar year holds the requested annual energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .data.types import HOUR, HolidayCalendar, LoadSeries, to_day, to_hour

SEASONS = ("winter", "transition", "summer")
DAY_CLASSES = ("workday", "saturday", "sunday")
PROFILE_TYPES = ("household", "commercial")


def _parse_band(text: str) -> tuple[tuple[int, int], tuple[int, int]]:
    lo, hi = text.split("..")
    return tuple(map(int, lo.split("-"))), tuple(map(int, hi.split("-")))


@dataclass(frozen=True, eq=False)
class ProfileAsset:
    shapes: dict  # (season, day_class) -> (24,) weights
    winter: tuple = ((11, 1), (3, 20))
    summer: tuple = ((5, 15), (9, 14))
    dynamization: tuple = ()  # highest power first; empty = none
    version: int = 1

    def season(self, day) -> str:
        d = to_day(day).item()
        md = (d.month, d.day)
        (wlo, whi), (slo, shi) = self.winter, self.summer
        if md >= wlo or md <= whi:
            return "winter"
        if slo <= md <= shi:
            return "summer"
        return "transition"


def load_asset(source) -> ProfileAsset:
    """Read a profile asset: ``# key: value`` header lines, then season,day_class,hour,weight rows."""
    if source in PROFILE_TYPES:
        text = resources.files("ecbench").joinpath(f"assets/slp_{source}.csv").read_text()
    else:
        text = Path(source).read_text()
    meta, shapes = {}, {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
            continue
        if line.startswith("season,"):
            continue
        season, cls, hour, weight = line.split(",")
        shapes.setdefault((season, cls), np.zeros(24))[int(hour)] = float(weight)
    missing = [(s, c) for s in SEASONS for c in DAY_CLASSES if (s, c) not in shapes]
    if missing:
        raise ValueError(f"profile asset lacks shapes for {missing}")
    kw = {}
    if "season winter" in meta:
        kw["winter"] = _parse_band(meta["season winter"])
    if "season summer" in meta:
        kw["summer"] = _parse_band(meta["season summer"])
    if "dynamization" in meta:
        kw["dynamization"] = tuple(float(c) for c in meta["dynamization"].split())
    if "version" in meta:
        kw["version"] = int(meta["version"])
    return ProfileAsset(shapes=shapes, **kw)


@dataclass(frozen=True)
class SyntheticSpec:
    profile_type: str
    start: str
    stop: str  # exclusive
    annual_energy: float  # kWh per calendar year
    calendar: HolidayCalendar = field(default_factory=HolidayCalendar)

    def __post_init__(self):
        if self.profile_type not in PROFILE_TYPES:
            raise ValueError(f"profile_type must be one of {PROFILE_TYPES}")
        if not self.annual_energy > 0:
            raise ValueError("annual_energy must be positive")
        if to_hour(self.stop) <= to_hour(self.start):
            raise ValueError("empty date range")


def day_class(day, calendar: HolidayCalendar | None = None) -> str:
    d = to_day(day)
    wd = int((d.astype(np.int64) + 3) % 7)
    if wd == 6 or (calendar is not None and d in calendar):
        return "sunday"
    return "saturday" if wd == 5 else "workday"


def base_shape(day, asset: ProfileAsset, calendar: HolidayCalendar | None = None) -> np.ndarray:
    """Undynamized 24-hour weights for ``day``."""
    return asset.shapes[(asset.season(day), day_class(day, calendar))]


def dynamization_factors(year: int, asset: ProfileAsset) -> np.ndarray:
    """Per-day factors of one year, normalized to mean 1; ones when the asset has none."""
    first = np.datetime64(f"{year:04d}-01-01")
    n = int((np.datetime64(f"{year + 1:04d}-01-01") - first).astype(int))
    if not asset.dynamization:
        return np.ones(n)
    f = np.polyval(asset.dynamization, np.arange(1, n + 1))
    return f / f.mean()


def _year_profile(year: int, asset: ProfileAsset, calendar, annual_energy: float) -> np.ndarray:
    days = np.arange(np.datetime64(f"{year:04d}-01-01"), np.datetime64(f"{year + 1:04d}-01-01"))
    dyn = dynamization_factors(year, asset)
    vals = np.concatenate([base_shape(d, asset, calendar) * f for d, f in zip(days, dyn)])
    return vals * (annual_energy / vals.sum())


def generate_profile(spec: SyntheticSpec, asset: ProfileAsset | str | None = None) -> LoadSeries:
    """Hourly kW series over ``[spec.start, spec.stop)``."""
    if asset is None or isinstance(asset, (str, Path)):
        asset = load_asset(asset or spec.profile_type)
    start, stop = to_hour(spec.start), to_hour(spec.stop)
    y0 = int(start.astype("datetime64[Y]").astype(int)) + 1970
    y1 = int((stop - HOUR).astype("datetime64[Y]").astype(int)) + 1970
    values = np.concatenate(
        [_year_profile(y, asset, spec.calendar, spec.annual_energy) for y in range(y0, y1 + 1)]
    )
    origin = np.datetime64(f"{y0:04d}-01-01T00", "h")
    i, j = int((start - origin) // HOUR), int((stop - origin) // HOUR)
    return LoadSeries(f"slp_{spec.profile_type}", np.arange(start, stop), values[i:j])


def annual_energy_for_mean(mean_kw: float) -> float:
    """Annual energy (kWh) whose non-leap-year mean power equals ``mean_kw``."""
    return float(mean_kw) * 8760.0
