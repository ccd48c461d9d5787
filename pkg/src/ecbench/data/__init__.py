from .community import aggregate, common_range, sample_communities
from .ingest import (
    GapWarning,
    load_holidays,
    load_prices,
    load_smart_meter,
    load_weather,
    write_holidays,
    write_loads,
    write_prices,
    write_weather,
)
from .split import TRAIN_MONTHS, make_split, quarter_bounds
from .synthetic import synthetic_households, synthetic_weather, weekly_periodic
from .tariff import SyntheticSpot, build_tariff
from .types import (
    HOUR,
    WEATHER_COLUMNS,
    CommunityProfile,
    DataError,
    DataSplit,
    HolidayCalendar,
    LoadSeries,
    PriceSeries,
    WeatherSeries,
    to_day,
    to_hour,
)

__all__ = [
    "HOUR",
    "TRAIN_MONTHS",
    "WEATHER_COLUMNS",
    "CommunityProfile",
    "DataError",
    "DataSplit",
    "GapWarning",
    "HolidayCalendar",
    "LoadSeries",
    "PriceSeries",
    "SyntheticSpot",
    "WeatherSeries",
    "aggregate",
    "build_tariff",
    "common_range",
    "load_holidays",
    "load_prices",
    "load_smart_meter",
    "load_weather",
    "make_split",
    "quarter_bounds",
    "sample_communities",
    "synthetic_households",
    "synthetic_weather",
    "to_day",
    "to_hour",
    "weekly_periodic",
    "write_holidays",
    "write_loads",
    "write_prices",
    "write_weather",
]
