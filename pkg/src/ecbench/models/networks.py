"""Sequence-to-sequence networks: (batch, 24, 20) -> (batch, 24)."""

from __future__ import annotations

import numpy as np

from ..features import N_FEATURES, N_HOURS
from ..neural import nn
from ..neural.tensor import Tensor
from .presets import ModelPreset


class LSTMNet(nn.Module):
    """Two stacked (optionally bidirectional) LSTMs, two linear dense layers, linear output."""

    def __init__(self, config: dict, rng):
        super().__init__()
        layer = nn.BiLSTM if config["bidirectional"] else nn.LSTM
        mult = 2 if config["bidirectional"] else 1
        self.rnn1 = layer(N_FEATURES, config["units1"], rng)
        self.rnn2 = layer(mult * config["units1"], config["units2"], rng)
        widths = [mult * config["units2"], *config["dense"]]
        self.dense = nn.ModuleList(nn.Linear(a, b, rng) for a, b in zip(widths, widths[1:]))
        self.head = nn.Linear(widths[-1], 1, rng)

    def forward(self, x: Tensor) -> Tensor:
        h = self.rnn2(self.rnn1(x))
        for layer in self.dense:
            h = layer(h)
        return self.head(h).reshape(x.shape[0], x.shape[1])


class TransformerNet(nn.Module):
    def __init__(self, config: dict, rng):
        super().__init__()
        d = config["dim"]
        self.proj = nn.Linear(N_FEATURES, d, rng)
        self.pe = nn.sinusoidal_encoding(N_HOURS, d)
        self.layers = nn.ModuleList(
            nn.EncoderLayer(d, config["heads"], config["ff_dim"], rng) for _ in range(config["layers"])
        )
        self.head = nn.Linear(d, 1, rng)

    def forward(self, x: Tensor) -> Tensor:
        h = self.proj(x) + self.pe[: x.shape[1]]
        for layer in self.layers:
            h = layer(h)
        return self.head(h).reshape(x.shape[0], x.shape[1])


class XLSTMNet(nn.Module):
    """Residual stack of mLSTM blocks with one sLSTM block at index ``slstm_at``."""

    def __init__(self, config: dict, rng):
        super().__init__()
        d, nh = config["dim"], config["heads"]
        self.proj = nn.Linear(N_FEATURES, d, rng)
        self.pe = nn.sinusoidal_encoding(N_HOURS, d)
        self.blocks = nn.ModuleList(
            nn.SLSTMBlock(d, nh, rng) if i == config["slstm_at"] else nn.MLSTMBlock(d, nh, rng)
            for i in range(config["blocks"])
        )
        self.norm = nn.LayerNorm(d, bias=False)
        self.head = nn.Linear(d, 1, rng)

    def forward(self, x: Tensor) -> Tensor:
        h = self.proj(x) + self.pe[: x.shape[1]]
        for block in self.blocks:
            h = block(h)
        return self.head(self.norm(h)).reshape(x.shape[0], x.shape[1])


NETWORKS = {"lstm": LSTMNet, "transformer": TransformerNet, "xlstm": XLSTMNet}


def build_network(preset: ModelPreset, rng: np.random.Generator | int) -> nn.Module:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return NETWORKS[preset.family](preset.config, rng)
