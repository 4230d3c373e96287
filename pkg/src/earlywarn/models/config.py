"""Hyperparameter dataclasses for the classifier families and training loop."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class FcnConfig:
    """Stacked conv blocks (filters, kernel width) + batch norm + ReLU,
    global average pooling, then a dense softmax head."""

    blocks: tuple[tuple[int, int], ...] = ((128, 8), (256, 5), (128, 3))

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("FCN needs at least one conv block")
        for filters, width in self.blocks:
            if filters < 1 or width < 1:
                raise ValueError(f"invalid conv block ({filters}, {width})")


@dataclass(frozen=True)
class LstmConfig:
    """Single recurrent layer; the last hidden state feeds the softmax head."""

    hidden_size: int = 64

    def __post_init__(self):
        if self.hidden_size < 1:
            raise ValueError("hidden_size must be >= 1")


@dataclass(frozen=True)
class MlpConfig:
    """Flattened input through dense+ReLU hidden layers to a softmax head."""

    hidden_sizes: tuple[int, ...] = (256, 128)

    def __post_init__(self):
        if not self.hidden_sizes:
            raise ValueError("MLP needs at least one hidden layer")
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError(f"invalid hidden sizes {self.hidden_sizes}")


@dataclass(frozen=True)
class KnnConfig:
    """k nearest neighbours under Euclidean (flattened) or DTW distance."""

    k: int = 5
    metric: str = "euclidean"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.metric not in ("euclidean", "dtw"):
            raise ValueError(f"unknown metric {self.metric!r}")


@dataclass(frozen=True)
class TrainConfig:
    """Gradient-descent training knobs shared by the neural families."""

    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 100
    patience: int = 10
    validation_fraction: float = 0.2
    seed: int = 0
    class_weights: bool = False
    grad_clip: float = 5.0
    precision: str = "float64"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2 (batch statistics)")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in (0, 1)")
        if self.grad_clip <= 0:
            raise ValueError("grad_clip must be positive")
        if self.precision not in ("float32", "float64"):
            raise ValueError(f"unknown precision {self.precision!r}")

    @property
    def dtype(self):
        import numpy as np
        return np.float32 if self.precision == "float32" else np.float64


MODEL_KINDS = ("fcn", "mlp", "lstm", "knn", "knn_dtw", "majority")


def default_model_config(kind: str):
    """The stock hyperparameters for a model kind (None for majority)."""
    if kind == "fcn":
        return FcnConfig()
    if kind == "mlp":
        return MlpConfig()
    if kind == "lstm":
        return LstmConfig()
    if kind == "knn":
        return KnnConfig(metric="euclidean")
    if kind == "knn_dtw":
        return KnnConfig(metric="dtw")
    if kind == "majority":
        return None
    raise ValueError(f"unknown model kind {kind!r}; expected one of "
                     f"{MODEL_KINDS}")
