from .battery import BatteryParams, build_battery
from .milp import (
    DispatchSchedule,
    InfeasibleError,
    MilpInstance,
    NodeLimitError,
    ScheduleError,
    build_daily_milp,
    check_schedule,
    realized_cost,
    realized_grid,
    solve_lp,
    solve_milp,
)
from .mpc import CostReport, DispatchError, PerfectForecast, TableForecast, day_range, simulate_mpc
from .simplex import LPResult, linprog

__all__ = [
    "BatteryParams",
    "CostReport",
    "DispatchError",
    "DispatchSchedule",
    "InfeasibleError",
    "LPResult",
    "MilpInstance",
    "NodeLimitError",
    "PerfectForecast",
    "ScheduleError",
    "TableForecast",
    "build_battery",
    "build_daily_milp",
    "check_schedule",
    "day_range",
    "linprog",
    "realized_cost",
    "realized_grid",
    "simulate_mpc",
    "solve_lp",
    "solve_milp",
]
