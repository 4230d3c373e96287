"""Mini-batch training loop with early stopping on validation weighted F1."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import SingleClassTrainingSetError, TrainingFailedError
from ..metrics import f1_metrics
from ..numkit.layers import Sequential, SoftmaxXent
from ..numkit.optim import Adam, clip_global_norm
from .config import TrainConfig

logger = logging.getLogger(__name__)


@dataclass
class TrainingHistory:
    """Per-epoch traces and the early-stopping outcome."""

    train_loss: list[float] = field(default_factory=list)
    val_weighted_f1: list[float] = field(default_factory=list)
    best_epoch: int = -1
    best_val_f1: float = float("-inf")

    @property
    def epochs_run(self) -> int:
        return len(self.train_loss)


def stratified_split(labels: np.ndarray, fraction: float,
                     seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Split indices into (fit, validation), stratified per class.

    Every class with at least two samples contributes at least one sample to
    each side; singleton classes stay on the fit side.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    fit_idx: list[np.ndarray] = []
    val_idx: list[np.ndarray] = []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        if len(idx) < 2:
            fit_idx.append(idx)
            continue
        n_val = int(round(fraction * len(idx)))
        n_val = min(max(1, n_val), len(idx) - 1)
        val_idx.append(idx[:n_val])
        fit_idx.append(idx[n_val:])
    fit = np.sort(np.concatenate(fit_idx))
    val = np.sort(np.concatenate(val_idx)) if val_idx else np.array([], int)
    return fit, val


def inverse_frequency_weights(labels: np.ndarray,
                              n_classes: int) -> np.ndarray:
    """Per-class weights proportional to 1/frequency, normalized to mean 1."""
    counts = np.bincount(np.asarray(labels), minlength=n_classes)
    weights = np.where(counts > 0, 1.0 / np.maximum(counts, 1), 0.0)
    present = weights[weights > 0]
    return weights / present.mean()


def predict_logits(net: Sequential, x: np.ndarray,
                   batch_size: int = 256) -> np.ndarray:
    """Eval-mode forward pass, batched to bound peak memory."""
    outs = [net.forward(x[lo:lo + batch_size], train=False)
            for lo in range(0, x.shape[0], batch_size)]
    return np.concatenate(outs, axis=0)


def predict_classes(net: Sequential, x: np.ndarray) -> np.ndarray:
    return np.argmax(predict_logits(net, x), axis=1)


def _weighted_f1(y_true: np.ndarray, y_pred: np.ndarray,
                 n_classes: int) -> float:
    names = tuple(f"class_{i}" for i in range(n_classes))
    return f1_metrics(y_true, y_pred, names).weighted_f1


def fit_network(net: Sequential, x: np.ndarray, y: np.ndarray,
                n_classes: int, tc: TrainConfig) -> TrainingHistory:
    """Adam training with early stopping; restores the best-epoch weights.

    The validation slice is carved out of ``x``/``y`` by stratified sampling,
    the monitored score is validation weighted F1, and training stops after
    ``patience`` epochs without improvement (or at ``max_epochs``). Trailing
    batches of a single sample are skipped because batch statistics need at
    least two rows.
    """
    x = np.ascontiguousarray(x, dtype=tc.dtype)
    y = np.asarray(y, dtype=np.int64)
    if np.unique(y).size < 2:
        raise SingleClassTrainingSetError(
            "training labels contain a single class; nothing to discriminate")

    fit_idx, val_idx = stratified_split(y, tc.validation_fraction, tc.seed)
    x_fit, y_fit = x[fit_idx], y[fit_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    class_weights = (inverse_frequency_weights(y_fit, n_classes)
                     if tc.class_weights else None)
    loss_fn = SoftmaxXent(n_classes)
    opt = Adam(lr=tc.learning_rate)
    rng = np.random.default_rng(tc.seed)
    history = TrainingHistory()
    best_state = {name: arr.copy()
                  for name, arr in net.params() + net.buffers()}
    stale = 0

    for epoch in range(tc.max_epochs):
        order = rng.permutation(len(y_fit))
        losses = []
        for lo in range(0, len(order), tc.batch_size):
            batch = order[lo:lo + tc.batch_size]
            if len(batch) < 2:
                continue
            logits = net.forward(x_fit[batch], train=True)
            loss, _ = loss_fn.forward(logits, y_fit[batch], class_weights)
            if not np.isfinite(loss):
                raise TrainingFailedError(
                    f"non-finite loss at epoch {epoch + 1}: {loss}")
            net.backward(loss_fn.backward())
            grads = [arr for _, arr in net.grads()]
            clip_global_norm(grads, tc.grad_clip)
            opt.step(list(zip([arr for _, arr in net.params()], grads)))
            losses.append(loss)
        history.train_loss.append(float(np.mean(losses)) if losses else 0.0)

        val_f1 = _weighted_f1(y_val, predict_classes(net, x_val), n_classes)
        history.val_weighted_f1.append(val_f1)
        if val_f1 > history.best_val_f1:
            history.best_val_f1 = val_f1
            history.best_epoch = epoch
            best_state = {name: arr.copy()
                          for name, arr in net.params() + net.buffers()}
            stale = 0
        else:
            stale += 1
            if stale >= tc.patience:
                logger.info("early stop at epoch %d (best %d, f1 %.4f)",
                            epoch + 1, history.best_epoch + 1,
                            history.best_val_f1)
                break

    net.set_arrays(best_state)
    return history
