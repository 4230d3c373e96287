"""k-nearest-neighbour classification over series tensors."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from .config import KnnConfig
from .dtw import dtw_cross_distances


def _euclidean_cross(queries: np.ndarray, corpus: np.ndarray) -> np.ndarray:
    """Pairwise Euclidean distances between flattened series."""
    q = queries.reshape(queries.shape[0], -1)
    c = corpus.reshape(corpus.shape[0], -1)
    diff = q[:, None, :] - c[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


class KnnClassifier:
    """Lazy learner: memorize the train split, vote among the k closest.

    Ties on vote count break toward the class with the smaller summed
    distance among its voters, then toward the smaller class index.
    """

    def __init__(self, config: KnnConfig, n_classes: int):
        self.config = config
        self.n_classes = n_classes
        self.train_x: np.ndarray | None = None
        self.train_y: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "KnnClassifier":
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if x.ndim != 3:
            raise ShapeMismatchError(f"expected (n, weeks, channels), got "
                                     f"{x.shape}")
        if x.shape[0] != y.shape[0]:
            raise ShapeMismatchError("sample count != label count")
        if x.shape[0] < 1:
            raise ShapeMismatchError("cannot fit on an empty train split")
        self.train_x = x
        self.train_y = y
        return self

    def distances(self, x: np.ndarray) -> np.ndarray:
        if self.train_x is None:
            raise ShapeMismatchError("classifier is not fitted")
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.train_x.shape[1:]:
            raise ShapeMismatchError(
                f"query shape {x.shape[1:]} != train shape "
                f"{self.train_x.shape[1:]}")
        if self.config.metric == "dtw":
            return dtw_cross_distances(x, self.train_x)
        return _euclidean_cross(x, self.train_x)

    def predict(self, x: np.ndarray) -> np.ndarray:
        dists = self.distances(x)
        k = min(self.config.k, self.train_x.shape[0])
        # stable sort keeps the smaller train index on distance ties
        order = np.argsort(dists, axis=1, kind="stable")[:, :k]
        preds = np.empty(dists.shape[0], dtype=np.int64)
        for i in range(dists.shape[0]):
            votes = np.zeros(self.n_classes, dtype=np.int64)
            winner_dist = np.zeros(self.n_classes)
            for j in order[i]:
                cls = self.train_y[j]
                votes[cls] += 1
                winner_dist[cls] += dists[i, j]
            top = votes.max()
            tied = np.flatnonzero(votes == top)
            if len(tied) == 1:
                preds[i] = tied[0]
            else:
                preds[i] = tied[np.argmin(winner_dist[tied])]
        return preds
