"""Network builders: wire numkit layers into the three neural families."""

from __future__ import annotations

import numpy as np

from ..numkit.layers import (
    BatchNorm,
    Conv1D,
    Dense,
    Flatten,
    GlobalAvgPool,
    ReLU,
    Sequential,
)
from .config import FcnConfig, LstmConfig, MlpConfig
from .lstm import LSTMLayer


def build_fcn(n_channels: int, n_classes: int, config: FcnConfig,
              rng: np.random.Generator, dtype=np.float64) -> Sequential:
    """Conv blocks (conv -> batch norm -> ReLU), pooled over time, to logits."""
    layers = []
    width = n_channels
    for filters, kernel in config.blocks:
        layers.append(Conv1D(width, filters, kernel, rng, dtype=dtype))
        layers.append(BatchNorm(filters, dtype=dtype))
        layers.append(ReLU())
        width = filters
    layers.append(GlobalAvgPool())
    layers.append(Dense(width, n_classes, rng, dtype=dtype))
    return Sequential(layers)


def build_mlp(n_weeks: int, n_channels: int, n_classes: int, config: MlpConfig,
              rng: np.random.Generator, dtype=np.float64) -> Sequential:
    """Flattened series through dense+ReLU stacks to logits."""
    layers: list = [Flatten()]
    width = n_weeks * n_channels
    for hidden in config.hidden_sizes:
        layers.append(Dense(width, hidden, rng, dtype=dtype))
        layers.append(ReLU())
        width = hidden
    layers.append(Dense(width, n_classes, rng, dtype=dtype))
    return Sequential(layers)


def build_lstm(n_channels: int, n_classes: int, config: LstmConfig,
               rng: np.random.Generator, dtype=np.float64) -> Sequential:
    """Recurrent encoder; the final hidden state maps linearly to logits."""
    return Sequential([
        LSTMLayer(n_channels, config.hidden_size, rng, dtype=dtype),
        Dense(config.hidden_size, n_classes, rng, dtype=dtype),
    ])


def build_network(kind: str, n_weeks: int, n_channels: int, n_classes: int,
                  config, rng: np.random.Generator,
                  dtype=np.float64) -> Sequential:
    if kind == "fcn":
        return build_fcn(n_channels, n_classes, config, rng, dtype=dtype)
    if kind == "mlp":
        return build_mlp(n_weeks, n_channels, n_classes, config, rng,
                         dtype=dtype)
    if kind == "lstm":
        return build_lstm(n_channels, n_classes, config, rng, dtype=dtype)
    raise ValueError(f"no network builder for model kind {kind!r}")
