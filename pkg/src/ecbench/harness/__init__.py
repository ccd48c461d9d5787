from .grid import AXES, GridConfig, GridData, GridInterrupted, ResultRecord, run_grid
from .metrics import Correlation, correlate, daily_nmae, mae, mean_sd, nmae
from .report import emit_cost_reports, emit_report, summarize, write_results_csv

__all__ = [
    "AXES",
    "Correlation",
    "GridConfig",
    "GridData",
    "GridInterrupted",
    "ResultRecord",
    "correlate",
    "daily_nmae",
    "emit_cost_reports",
    "emit_report",
    "mae",
    "mean_sd",
    "nmae",
    "run_grid",
    "summarize",
    "write_results_csv",
]
