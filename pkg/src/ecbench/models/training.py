"""Mini-batch Adam training with a staged learning rate."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..neural import Adam, Tensor, mae_loss

logger = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 256
    lr_stages: tuple = (0.01, 0.005, 0.001, 0.0005)
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError(f"epochs and batch_size must be positive, got {self.epochs}, {self.batch_size}")
        if not self.lr_stages:
            raise ValueError("lr_stages is empty")

    def lr_at(self, epoch: int) -> float:
        """Stages split the epochs into equal spans (25/50/75 for 100 epochs)."""
        n = len(self.lr_stages)
        return float(self.lr_stages[min(epoch * n // self.epochs, n - 1)])


def fit_network(net, X: np.ndarray, y: np.ndarray, config: TrainConfig, rng: np.random.Generator) -> list[float]:
    """Minimise MAE of ``net(X)`` against ``y``; returns the mean loss per epoch.

    Every epoch visits all rows once in a fresh random order; the final
    partial batch is kept.
    """
    n = len(X)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    opt = Adam(net.parameters())
    curve = []
    for epoch in range(config.epochs):
        opt.lr = config.lr_at(epoch)
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            opt.zero_grad()
            loss = mae_loss(net(Tensor(X[idx])), Tensor(y[idx]))
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingError(
                    f"non-finite loss {value} at epoch {epoch}, batch starting at row {lo} (lr {opt.lr})"
                )
            loss.backward()
            opt.step()
            total += value * len(idx)
        curve.append(total / n)
        logger.debug("epoch %d lr %.4g loss %.6g", epoch, opt.lr, curve[-1])
    return curve
