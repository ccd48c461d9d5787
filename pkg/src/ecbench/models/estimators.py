"""Forecasters with a scikit-learn style interface.

All of them consume raw feature windows ``X`` of shape ``(n, 24, 20)`` (as in
:attr:`ecbench.features.Dataset.X`) and targets ``y`` of shape ``(n, 24)`` in
kW. Models that need standardised inputs fit their own
:class:`~ecbench.features.FeatureScaler` inside ``fit``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..data.types import HOUR, DataError, LoadSeries, to_day
from ..features import LAG_COLS, N_HOURS, FeatureScaler, _check_windows
from ..neural import Tensor, no_grad
from ..neural.checkpoint import assign_params, load_params, save_params
from .networks import build_network
from .presets import get_preset
from .training import TrainConfig, fit_network


def _check_targets(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (n, N_HOURS):
        raise ValueError(f"expected targets of shape ({n}, {N_HOURS}), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets contain non-finite values")
    return y


def persistence_forecast(history: LoadSeries, day) -> np.ndarray:
    """Load of the same 24 hours one week earlier."""
    start = to_day(day).astype("datetime64[h]") - 168 * HOUR
    if not history.covers(start, start + 23 * HOUR):
        raise DataError(f"persistence for {to_day(day)} needs load from {start}, series starts {history.start}")
    return np.array(history.window(start, N_HOURS))


class PersistenceForecaster(BaseEstimator):
    """Repeats last week: reads the one-week lag column of each window."""

    family = "persistence"

    def fit(self, X, y=None):
        _check_windows(X)
        self.n_features_in_ = X.shape[-1]
        return self

    def predict(self, X):
        check_is_fitted(self, "n_features_in_")
        return _check_windows(X)[:, :, LAG_COLS[0]].copy()


class KNNForecaster(BaseEstimator):
    """Inverse-distance weighted k nearest neighbours over individual hours.

    Every (window, hour) row of the training windows is a sample with 20
    standardised features and one target value.
    """

    family = "knn"

    def __init__(self, n_neighbors: int = 40, chunk_size: int = 96):
        self.n_neighbors = n_neighbors
        self.chunk_size = chunk_size

    def fit(self, X, y):
        X = _check_windows(X)
        y = _check_targets(y, len(X))
        if self.n_neighbors < 1:
            raise ValueError(f"n_neighbors must be >= 1, got {self.n_neighbors}")
        if X.shape[0] * N_HOURS < self.n_neighbors:
            raise ValueError(f"{X.shape[0] * N_HOURS} training rows, need at least n_neighbors={self.n_neighbors}")
        self.scaler_ = FeatureScaler().fit(X)
        self.rows_ = self.scaler_.transform(X).reshape(-1, X.shape[-1])
        self.targets_ = y.reshape(-1)
        return self

    def predict_rows(self, Q: np.ndarray) -> np.ndarray:
        """Predictions for standardised query rows ``Q`` of shape (m, 20)."""
        k = self.n_neighbors
        out = np.empty(len(Q))
        for lo in range(0, len(Q), self.chunk_size):
            q = Q[lo : lo + self.chunk_size]
            d = np.sqrt(np.square(q[:, None, :] - self.rows_[None, :, :]).sum(axis=-1))
            nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
            dn = np.take_along_axis(d, nearest, axis=1)
            yn = self.targets_[nearest]
            for i in range(len(q)):
                zero = dn[i] == 0.0
                if zero.any():
                    out[lo + i] = yn[i, zero].mean()
                else:
                    w = 1.0 / dn[i]
                    out[lo + i] = (w * yn[i]).sum() / w.sum()
        return out

    def predict(self, X):
        check_is_fitted(self, "rows_")
        X = _check_windows(X)
        Q = self.scaler_.transform(X).reshape(-1, X.shape[-1])
        return self.predict_rows(Q).reshape(len(X), N_HOURS)


class DeepForecaster(BaseEstimator):
    """Shared fit/predict for the neural families.

    Targets are standardised with the training mean and standard deviation
    before training and mapped back in ``predict``; ``loss_curve_`` is in kW.
    With ``warm_start=True`` a second ``fit`` continues from the current
    weights, input scaler and target scaling.
    """

    family = None

    def __init__(
        self,
        size_class: str = "5k",
        epochs: int = 100,
        batch_size: int = 256,
        lr_stages=(0.01, 0.005, 0.001, 0.0005),
        random_state: int = 0,
        warm_start: bool = False,
    ):
        self.size_class = size_class
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr_stages = lr_stages
        self.random_state = random_state
        self.warm_start = warm_start

    @property
    def preset(self):
        return get_preset(self.family, self.size_class)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.epochs, self.batch_size, tuple(self.lr_stages), self.random_state)

    def _init_network(self):
        self.network_ = build_network(self.preset, np.random.default_rng([self.random_state, 0]))

    def fit(self, X, y, scaler: FeatureScaler | None = None, y_stats=None):
        """Train on raw windows.

        ``scaler`` and ``y_stats`` (mean, std) override the statistics that
        would otherwise be fitted on ``X`` and ``y``; transfer learning uses
        them to pretrain in the target's coordinates.
        """
        X = _check_windows(X)
        y = _check_targets(y, len(X))
        config = self.train_config()
        continuing = self.warm_start and hasattr(self, "network_")
        if not continuing:
            self._init_network()
            self.scaler_ = scaler if scaler is not None else FeatureScaler().fit(X)
            if y_stats is None:
                sd = float(y.std())
                y_stats = (float(y.mean()), sd if sd > 1e-12 else 1.0)
            self.y_mean_, self.y_scale_ = map(float, y_stats)
            self.n_fits_ = 0
        rng = np.random.default_rng([self.random_state, 1, self.n_fits_])
        Xs = self.scaler_.transform(X)
        ys = (y - self.y_mean_) / self.y_scale_
        curve = fit_network(self.network_, Xs, ys, config, rng)
        self.loss_curve_ = [c * self.y_scale_ for c in curve]
        self.n_fits_ += 1
        return self

    def predict(self, X, batch_size: int = 512):
        check_is_fitted(self, "network_")
        Xs = self.scaler_.transform(X)
        out = []
        with no_grad():
            for lo in range(0, len(Xs), batch_size):
                out.append(self.network_(Tensor(Xs[lo : lo + batch_size])).data)
        return np.concatenate(out) * self.y_scale_ + self.y_mean_

    def n_params(self) -> int:
        net = self.network_ if hasattr(self, "network_") else build_network(self.preset, 0)
        return net.n_params()

    def save(self, path) -> None:
        check_is_fitted(self, "network_")
        meta = {
            "family": self.family,
            "params": self.get_params(),
            "scaler_mean": self.scaler_.mean_.tolist(),
            "scaler_scale": self.scaler_.scale_.tolist(),
            "y_mean": self.y_mean_,
            "y_scale": self.y_scale_,
        }
        meta["params"]["lr_stages"] = list(self.lr_stages)
        save_params(path, self.network_.named_parameters(), meta)

    @staticmethod
    def load(path) -> "DeepForecaster":
        meta, params = load_params(path)
        cls = DEEP_FAMILIES.get(meta.get("family"))
        if cls is None:
            raise ValueError(f"{path}: unknown model family {meta.get('family')!r}")
        est = cls(**meta["params"])
        est._init_network()
        assign_params(est.network_, params)
        est.scaler_ = FeatureScaler()
        est.scaler_.mean_ = np.array(meta["scaler_mean"])
        est.scaler_.scale_ = np.array(meta["scaler_scale"])
        est.y_mean_, est.y_scale_ = meta["y_mean"], meta["y_scale"]
        est.n_fits_ = 1
        return est


class LSTMForecaster(DeepForecaster):
    family = "lstm"


class TransformerForecaster(DeepForecaster):
    family = "transformer"


class XLSTMForecaster(DeepForecaster):
    family = "xlstm"


DEEP_FAMILIES = {c.family: c for c in (LSTMForecaster, TransformerForecaster, XLSTMForecaster)}
FAMILIES = {"persistence": PersistenceForecaster, "knn": KNNForecaster, **DEEP_FAMILIES}


def make_forecaster(family: str, **params) -> BaseEstimator:
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    return cls(**params)


def train(forecaster: DeepForecaster, dataset, config: TrainConfig):
    """Fit ``forecaster`` on ``dataset`` under ``config``; returns (forecaster, loss curve in kW)."""
    if not isinstance(forecaster, DeepForecaster):
        raise TypeError(f"train() needs a deep forecaster, got {type(forecaster).__name__}")
    forecaster.set_params(
        epochs=config.epochs, batch_size=config.batch_size, lr_stages=tuple(config.lr_stages), random_state=config.seed
    )
    forecaster.fit(dataset.X, dataset.y)
    return forecaster, forecaster.loss_curve_


def pretrain_finetune(forecaster: DeepForecaster, synth, target, config: TrainConfig) -> DeepForecaster:
    """Pretrain on ``synth`` and fine-tune every layer on ``target``.

    Both phases use the target's input scaler and target scaling so that
    the pretrained weights already live in the target's coordinates.
    """
    if synth.X.shape[1:] != target.X.shape[1:]:
        raise ValueError(f"feature schema mismatch: synthetic {synth.X.shape[1:]} vs target {target.X.shape[1:]}")
    sd = float(target.y.std())
    y_stats = (float(target.y.mean()), sd if sd > 1e-12 else 1.0)
    forecaster.set_params(
        epochs=config.epochs,
        batch_size=config.batch_size,
        lr_stages=tuple(config.lr_stages),
        random_state=config.seed,
        warm_start=False,
    )
    forecaster.fit(synth.X, synth.y, scaler=target.scaler, y_stats=y_stats)
    forecaster.pretrain_curve_ = forecaster.loss_curve_
    forecaster.set_params(warm_start=True)
    forecaster.fit(target.X, target.y)
    forecaster.set_params(warm_start=False)
    return forecaster
