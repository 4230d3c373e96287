"""Finite-difference gradient checking.

Central differences with a fixed step; when an op has more than
``max_coords`` coordinates, a seeded random subset is probed instead of the
full set. Intended for float64 arrays only: float32 rounding drowns the
difference quotient.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

DEFAULT_STEP = 1e-5
DEFAULT_MAX_COORDS = 10_000


def grad_check(scalar_fn: Callable[[], float],
               arrays: Sequence[np.ndarray],
               analytic: Sequence[np.ndarray],
               step: float = DEFAULT_STEP,
               max_coords: int = DEFAULT_MAX_COORDS,
               seed: int = 0) -> float:
    """Max relative error between analytic gradients and central differences.

    ``scalar_fn`` re-evaluates the op from the current contents of ``arrays``
    (perturbed in place, then restored). ``analytic`` holds the precomputed
    gradient of the scalar w.r.t. each array. Relative error per coordinate is
    |a - n| / max(|a|, |n|, 1).
    """
    sizes = [a.size for a in arrays]
    total = int(np.sum(sizes))
    if total > max_coords:
        rng = np.random.default_rng(seed)
        chosen = rng.choice(total, size=max_coords, replace=False)
        chosen.sort()
    else:
        chosen = np.arange(total)
    bounds = np.cumsum([0] + sizes)
    worst = 0.0
    for flat in chosen:
        which = int(np.searchsorted(bounds, flat, side="right") - 1)
        offset = int(flat - bounds[which])
        arr = arrays[which]
        original = arr.flat[offset]
        arr.flat[offset] = original + step
        f_plus = scalar_fn()
        arr.flat[offset] = original - step
        f_minus = scalar_fn()
        arr.flat[offset] = original
        numeric = (f_plus - f_minus) / (2.0 * step)
        a = float(analytic[which].flat[offset])
        rel = abs(a - numeric) / max(abs(a), abs(numeric), 1.0)
        worst = max(worst, rel)
    return worst


def check_layer(layer, x: np.ndarray, probe_seed: int = 0,
                train: bool = True, **kwargs) -> float:
    """Gradient-check a layer through a fixed random linear probe.

    The scalar under test is sum(forward(x) * probe); its analytic gradients
    come from one backward pass with the probe as upstream. ``train`` selects
    the forward mode under test.
    """
    rng = np.random.default_rng(probe_seed)
    out = layer.forward(x, train=train)
    probe = rng.standard_normal(out.shape)
    grad_x = layer.backward(probe)
    analytic = [grad_x] + [g for _, g in layer.grads()]
    arrays = [x] + [p for _, p in layer.params()]

    def scalar():
        return float((layer.forward(x, train=train) * probe).sum())

    return grad_check(scalar, arrays, analytic, **kwargs)
