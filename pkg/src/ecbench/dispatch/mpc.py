"""Day-by-day dispatch simulation and cost accounting."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ..data.types import LoadSeries, PriceSeries, to_day
from .battery import BatteryParams
from .milp import InfeasibleError, NodeLimitError, build_daily_milp, realized_cost, solve_milp


class DispatchError(RuntimeError):
    def __init__(self, day, cause: Exception):
        self.day = day
        self.cause = cause
        super().__init__(f"dispatch failed on {day}: {cause}")


class PerfectForecast:
    """Oracle that returns the actual load; switches the grid floor off."""

    is_perfect = True
    name = "perfect"

    def __init__(self, load: LoadSeries):
        self.load = load

    def __call__(self, day) -> np.ndarray:
        return np.array(self.load.window(to_day(day).astype("datetime64[h]"), 24))


class TableForecast:
    """Precomputed forecasts keyed by day, e.g. ``estimator.predict(test.X)`` with ``test.days``."""

    is_perfect = False

    def __init__(self, days, forecasts, name: str = "model"):
        forecasts = np.asarray(forecasts, dtype=float)
        self.table = {to_day(d): forecasts[i] for i, d in enumerate(days)}
        self.name = name

    def __call__(self, day) -> np.ndarray:
        try:
            return self.table[to_day(day)]
        except KeyError:
            raise KeyError(f"no forecast for {to_day(day)}") from None


@dataclass
class CostReport:
    forecaster: str
    days: list
    unoptimized: np.ndarray  # EUR per day without battery
    optimized: np.ndarray  # realized EUR per day
    nmae: np.ndarray  # per-day forecast nMAE (%)
    schedules: list = field(default_factory=list, repr=False)
    forecasts: list = field(default_factory=list, repr=False)
    actuals: list = field(default_factory=list, repr=False)
    prices: list = field(default_factory=list, repr=False)

    @property
    def total_unoptimized(self) -> float:
        return float(np.sum(self.unoptimized))

    @property
    def total_optimized(self) -> float:
        return float(np.sum(self.optimized))

    @property
    def savings(self) -> float:
        return self.total_unoptimized - self.total_optimized

    @property
    def savings_pct(self) -> float:
        return 100.0 * self.savings / self.total_unoptimized

    def summary(self) -> dict:
        return {
            "forecaster": self.forecaster,
            "n_days": len(self.days),
            "first_day": str(self.days[0]) if self.days else None,
            "last_day": str(self.days[-1]) if self.days else None,
            "unoptimized_eur": round(self.total_unoptimized, 6),
            "optimized_eur": round(self.total_optimized, 6),
            "savings_eur": round(self.savings, 6),
            "savings_pct": round(self.savings_pct, 6),
            "mean_nmae_pct": round(float(np.mean(self.nmae)), 6),
            "daily": [
                {"day": str(d), "unoptimized_eur": round(float(u), 6), "optimized_eur": round(float(o), 6),
                 "nmae_pct": round(float(e), 6)}
                for d, u, o, e in zip(self.days, self.unoptimized, self.optimized, self.nmae)
            ],
        }  # fmt: skip

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_schedule_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["date", "hour", "P_ch", "P_dis", "P_grid", "E", "price", "forecast", "actual"])
            for day, s, f, a, pi in zip(self.days, self.schedules, self.forecasts, self.actuals, self.prices):
                for h in range(len(f)):
                    w.writerow([str(day), h, *(f"{v:.6f}" for v in (s.P_ch[h], s.P_dis[h], s.P_grid[h], s.E[h + 1],
                                                                     pi[h], f[h], a[h]))])  # fmt: skip


def _day_nmae(forecast, actual) -> float:
    m = float(np.mean(actual))
    return 100.0 * float(np.mean(np.abs(forecast - actual))) / m if m > 0 else float("nan")


def simulate_mpc(forecaster, load: LoadSeries, tariff: PriceSeries, battery: BatteryParams, days) -> CostReport:
    """Plan each day on the forecast, then settle the plan against the actual load.

    ``forecaster`` maps a day to 24 forecast values (negative values are
    clipped to zero); ``forecaster.is_perfect`` switches the grid floor off.
    """
    perfect = bool(getattr(forecaster, "is_perfect", False))
    name = getattr(forecaster, "name", type(forecaster).__name__)
    days = [to_day(d) for d in days]
    report = CostReport(name, days, np.zeros(len(days)), np.zeros(len(days)), np.zeros(len(days)))
    for i, day in enumerate(days):
        t0 = day.astype("datetime64[h]")
        actual = np.array(load.window(t0, 24))
        prices = np.array(tariff.window(t0, 24))
        forecast = np.maximum(np.asarray(forecaster(day), dtype=float), 0.0)
        if forecast.shape != (24,):
            raise DispatchError(day, ValueError(f"forecaster returned shape {forecast.shape}"))
        try:
            schedule = solve_milp(build_daily_milp(forecast, prices, battery, grid_floor_enabled=not perfect))
        except (InfeasibleError, NodeLimitError) as e:
            raise DispatchError(day, e) from e
        report.unoptimized[i] = float(np.sum(actual * prices))  # same summation as realized_cost
        report.optimized[i] = realized_cost(schedule, actual, prices)
        report.nmae[i] = _day_nmae(forecast, actual)
        report.schedules.append(schedule)
        report.forecasts.append(forecast)
        report.actuals.append(actual)
        report.prices.append(prices)
    return report


def day_range(start, n_days: int) -> list:
    first = to_day(start)
    return [first + np.timedelta64(i, "D") for i in range(n_days)]

