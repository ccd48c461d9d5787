from __future__ import annotations

import numpy as np

from .types import DataError, DataSplit

TRAIN_MONTHS = (2, 4, 6, 9, 12, 15)


def quarter_bounds(quarter: int, year: int) -> tuple[np.datetime64, np.datetime64]:
    if quarter not in (1, 2, 3, 4):
        raise ValueError(f"quarter must be 1..4, got {quarter}")
    first = np.datetime64(f"{year:04d}-{3 * (quarter - 1) + 1:02d}", "M")
    return first.astype("datetime64[h]"), (first + 3).astype("datetime64[h]")


def make_split(series, test_quarter: int, test_year: int, train_months: int) -> DataSplit:
    """Test on one calendar quarter, train on the months right before it.

    ``series`` is anything with ``start``/``end`` hourly bounds (a load or
    weather series); it must cover the whole train and test range.
    """
    if train_months < 1:
        raise ValueError("train_months must be positive")
    test_start, test_stop = quarter_bounds(test_quarter, test_year)
    month0 = test_start.astype("datetime64[M]")
    train_start = (month0 - train_months).astype("datetime64[h]")
    if series.start > train_start:
        have = series.start.astype("datetime64[M]")
        if series.start > have.astype("datetime64[h]"):
            have = have + 1
        missing = int((have - (month0 - train_months)).astype(int))
        raise DataError(
            f"Q{test_quarter} {test_year} with {train_months} training months needs data "
            f"from {month0 - train_months}; series starts {series.start} "
            f"({missing} month(s) missing)"
        )
    if series.end < test_stop - np.timedelta64(1, "h"):
        raise DataError(
            f"series ends {series.end}, before the end of Q{test_quarter} {test_year}"
        )
    return DataSplit(
        train_start=train_start,
        train_stop=test_start,
        test_start=test_start,
        test_stop=test_stop,
        test_quarter=test_quarter,
        test_year=test_year,
        train_months=train_months,
    )
