"""Majority-class baseline: always predict the most frequent train label."""

from __future__ import annotations

import numpy as np


def majority_class(y: np.ndarray, n_classes: int) -> int:
    """Most frequent class index; ties resolve to the smaller index."""
    y = np.asarray(y, dtype=np.int64)
    if y.size == 0:
        raise ValueError("cannot take a majority over zero labels")
    return int(np.argmax(np.bincount(y, minlength=n_classes)))


def majority_predict(majority: int, n_samples: int) -> np.ndarray:
    return np.full(n_samples, majority, dtype=np.int64)
