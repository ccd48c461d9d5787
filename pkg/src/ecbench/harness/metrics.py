from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _pair(forecast, actual) -> tuple[np.ndarray, np.ndarray]:
    f = np.asarray(forecast, dtype=float)
    a = np.asarray(actual, dtype=float)
    if f.shape != a.shape:
        raise ValueError(f"forecast shape {f.shape} != actual shape {a.shape}")
    if a.size == 0:
        raise ValueError("empty series")
    return f, a


def mae(forecast, actual) -> float:
    f, a = _pair(forecast, actual)
    return float(np.mean(np.abs(f - a)))


def nmae(forecast, actual) -> float:
    """Mean absolute error as a percentage of the mean actual value."""
    f, a = _pair(forecast, actual)
    mean = float(np.mean(a))
    if not mean > 0:
        raise ValueError(f"nMAE undefined: mean of actual values is {mean}")
    return 100.0 * float(np.mean(np.abs(f - a))) / mean


def daily_nmae(forecast, actual) -> np.ndarray:
    """nMAE of each row (day), normalised by that day's own mean; NaN for days whose mean load is not positive."""
    f, a = _pair(forecast, actual)
    f, a = np.atleast_2d(f), np.atleast_2d(a)
    mean = a.mean(axis=1)
    err = np.abs(f - a).mean(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(mean > 0, 100.0 * err / np.where(mean > 0, mean, 1.0), np.nan)


@dataclass(frozen=True)
class Correlation:
    r: np.ndarray  # one coefficient per feature column
    constant: np.ndarray  # True where the column (or target) had zero variance; r is 0 there


def correlate(features, target=None) -> Correlation:
    """Pearson r between every feature column and the target over all window-hours.

    ``features`` is either a Dataset (target taken from it) or an array whose
    last axis indexes features and whose leading axes match ``target``.
    """
    if target is None:
        features, target = features.X, features.y
    X = np.asarray(features, dtype=float)
    y = np.asarray(target, dtype=float)
    if X.shape[:-1] != y.shape:
        raise ValueError(f"features {X.shape} do not align with target {y.shape}")
    X = X.reshape(-1, X.shape[-1])
    y = y.reshape(-1)
    xc = X - X.mean(axis=0)
    yc = y - y.mean()
    sx = np.sqrt((xc**2).sum(axis=0))
    sy = np.sqrt((yc**2).sum())
    constant = (sx <= 1e-12 * max(1.0, np.abs(X).max())) | (sy <= 1e-12 * max(1.0, np.abs(y).max()))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (xc * yc[:, None]).sum(axis=0) / (sx * sy)
    r = np.where(constant, 0.0, np.clip(r, -1.0, 1.0))
    return Correlation(r, constant)


def mean_sd(values) -> tuple[float, float]:
    """Mean and sample standard deviation (n - 1); sd is 0 for a single value."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0
