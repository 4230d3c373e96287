"""Deterministic numeric kernels with hand-derived gradients.

No autodiff: every layer implements its own backward pass, and each one is
validated against central finite differences (see ``gradcheck``).
"""

from .checkpoint import load_params, save_params
from .gradcheck import check_layer, grad_check
from .layers import (
    BatchNorm,
    Conv1D,
    Dense,
    Flatten,
    GlobalAvgPool,
    Layer,
    ReLU,
    Sequential,
    SoftmaxXent,
    dense_softmax_xent,
)
from .optim import Adam

__all__ = [
    "Adam",
    "BatchNorm",
    "Conv1D",
    "Dense",
    "Flatten",
    "GlobalAvgPool",
    "Layer",
    "ReLU",
    "Sequential",
    "SoftmaxXent",
    "check_layer",
    "dense_softmax_xent",
    "grad_check",
    "load_params",
    "save_params",
]
