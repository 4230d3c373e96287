"""Adam optimizer with bias correction."""

from __future__ import annotations

import numpy as np


class Adam:
    """Standard Adam; one moment pair per parameter array, updated in place.

    Moment slots are keyed by position, so ``step`` must always receive the
    same parameter list in the same order.
    """

    def __init__(self, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.first_moment: list[np.ndarray] | None = None
        self.second_moment: list[np.ndarray] | None = None

    def step(self, params_and_grads: list[tuple[np.ndarray, np.ndarray]]) -> None:
        if self.first_moment is None:
            self.first_moment = [np.zeros_like(p) for p, _ in params_and_grads]
            self.second_moment = [np.zeros_like(p) for p, _ in params_and_grads]
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for (p, g), m, v in zip(params_and_grads, self.first_moment,
                                self.second_moment):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def clip_global_norm(grads: list[np.ndarray], max_norm: float) -> float:
    """Scale all gradients in place so their joint L2 norm is <= max_norm."""
    total = float(np.sqrt(sum(float((g * g).sum()) for g in grads)))
    if total > max_norm > 0.0:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total
