"""Neural-net building blocks over plain numpy arrays.

Sequence layers work on (batch, time, channels) arrays, dense layers on
(batch, features). All layers are single-threaded and deterministic; float64
is used for gradient checking, float32 is available for faster training.
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    DegenerateBatchError,
    InvalidTargetError,
    ShapeMismatchError,
)


def _glorot_uniform(rng: np.random.Generator, shape, fan_in, fan_out, dtype):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Layer:
    """Base layer: explicit parameters, gradients, and non-trainable buffers.

    ``params()`` arrays are updated in place by the optimizer; ``grads()``
    arrays are (re)filled by ``backward()`` and stay aligned with ``params()``.
    """

    def params(self) -> list[tuple[str, np.ndarray]]:
        return []

    def grads(self) -> list[tuple[str, np.ndarray]]:
        return []

    def buffers(self) -> list[tuple[str, np.ndarray]]:
        return []

    def forward(self, x: np.ndarray, train: bool = True) -> np.ndarray:
        raise NotImplementedError

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv1D(Layer):
    """1-D convolution over (batch, time, c_in), stride 1, "same" zero padding.

    Uses the true-convolution orientation (kernel flipped while sliding), so a
    single-channel layer matches ``numpy.convolve(x, kernel, mode="same")``.
    Output time length always equals input time length.
    """

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 rng: np.random.Generator, dtype=np.float64):
        if kernel_size < 1 or in_channels < 1 or out_channels < 1:
            raise ShapeMismatchError("conv1d needs kernel_size/channels >= 1")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        # pads chosen so out[t] = full_convolution[t + (k-1)//2]
        self.pad_left = kernel_size - 1 - (kernel_size - 1) // 2
        self.pad_right = (kernel_size - 1) // 2
        self.kernel = _glorot_uniform(
            rng, (kernel_size, in_channels, out_channels),
            kernel_size * in_channels, kernel_size * out_channels, dtype)
        self.bias = np.zeros(out_channels, dtype=dtype)
        self.g_kernel = np.zeros_like(self.kernel)
        self.g_bias = np.zeros_like(self.bias)
        self._cache = None

    def params(self):
        return [("kernel", self.kernel), ("bias", self.bias)]

    def grads(self):
        return [("kernel", self.g_kernel), ("bias", self.g_bias)]

    def forward(self, x, train=True):
        if x.ndim != 3 or x.shape[2] != self.in_channels:
            raise ShapeMismatchError(
                f"conv1d expected (b, t, {self.in_channels}), got {x.shape}")
        b, t, _ = x.shape
        k = self.kernel_size
        xpad = np.zeros((b, t + k - 1, self.in_channels), dtype=x.dtype)
        xpad[:, self.pad_left:self.pad_left + t, :] = x
        flipped = self.kernel[::-1]
        out = np.empty((b, t, self.out_channels), dtype=x.dtype)
        out[:] = self.bias
        for i in range(k):
            out += xpad[:, i:i + t, :] @ flipped[i]
        self._cache = (xpad, t)
        return out

    def backward(self, upstream):
        xpad, t = self._cache
        k = self.kernel_size
        flipped = self.kernel[::-1]
        self.g_bias = upstream.sum(axis=(0, 1))
        g_flipped = np.empty_like(self.kernel)
        g_xpad = np.zeros_like(xpad)
        for i in range(k):
            window = xpad[:, i:i + t, :]
            g_flipped[i] = np.tensordot(window, upstream, axes=([0, 1], [0, 1]))
            g_xpad[:, i:i + t, :] += upstream @ flipped[i].T
        self.g_kernel = g_flipped[::-1].copy()
        return g_xpad[:, self.pad_left:self.pad_left + t, :]


class BatchNorm(Layer):
    """Per-channel batch normalization for (b, t, c) or (b, f) inputs.

    Train mode standardizes with batch statistics and updates running stats
    with the given momentum; eval mode uses the running stats only, so it is
    deterministic for a fixed state. The exponential averages are
    zero-debiased (divided by 1 - momentum**updates) before use, so eval
    predictions are sensible from the very first update instead of being
    dominated by the arbitrary zero/one initialization for dozens of steps.
    """

    def __init__(self, channels: int, momentum: float = 0.9, eps: float = 1e-5,
                 dtype=np.float64):
        self.channels = channels
        self.momentum = momentum
        self.eps = eps
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.zeros(channels, dtype=dtype)
        self.updates = np.zeros((), dtype=dtype)
        self.g_gamma = np.zeros_like(self.gamma)
        self.g_beta = np.zeros_like(self.beta)
        self._cache = None

    def params(self):
        return [("gamma", self.gamma), ("beta", self.beta)]

    def grads(self):
        return [("gamma", self.g_gamma), ("beta", self.g_beta)]

    def buffers(self):
        return [("running_mean", self.running_mean),
                ("running_var", self.running_var),
                ("updates", self.updates)]

    def forward(self, x, train=True):
        if x.shape[-1] != self.channels:
            raise ShapeMismatchError(
                f"batchnorm expected {self.channels} channels, got {x.shape}")
        axes = tuple(range(x.ndim - 1))
        if train:
            if x.shape[0] < 2:
                raise DegenerateBatchError(
                    "batchnorm train mode needs a batch of at least 2")
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)
            self.running_mean[...] = (self.momentum * self.running_mean
                                      + (1.0 - self.momentum) * mean)
            self.running_var[...] = (self.momentum * self.running_var
                                     + (1.0 - self.momentum) * var)
            self.updates += 1.0
        elif self.updates > 0:
            debias = 1.0 - self.momentum ** float(self.updates)
            mean = self.running_mean / debias
            var = self.running_var / debias
        else:  # never trained: fall back to the identity standardization
            mean = np.zeros(self.channels, dtype=x.dtype)
            var = np.ones(self.channels, dtype=x.dtype)
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        self._cache = (xhat, inv_std, axes, train)
        return self.gamma * xhat + self.beta

    def backward(self, upstream):
        xhat, inv_std, axes, train = self._cache
        self.g_gamma = (upstream * xhat).sum(axis=axes)
        self.g_beta = upstream.sum(axis=axes)
        g_xhat = upstream * self.gamma
        if not train:
            return g_xhat * inv_std
        n = xhat.size // xhat.shape[-1]
        return (inv_std / n) * (n * g_xhat
                                - g_xhat.sum(axis=axes)
                                - xhat * (g_xhat * xhat).sum(axis=axes))


class ReLU(Layer):
    def forward(self, x, train=True):
        self._mask = x > 0
        return x * self._mask

    def backward(self, upstream):
        return upstream * self._mask


class GlobalAvgPool(Layer):
    """Mean over the time axis: (b, t, c) -> (b, c)."""

    def forward(self, x, train=True):
        self._t = x.shape[1]
        return x.mean(axis=1)

    def backward(self, upstream):
        t = self._t
        return np.repeat(upstream[:, None, :] / t, t, axis=1)


class Flatten(Layer):
    """(b, t, c) -> (b, t*c), row-major."""

    def forward(self, x, train=True):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, upstream):
        return upstream.reshape(self._shape)


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int,
                 rng: np.random.Generator, dtype=np.float64):
        self.in_features = in_features
        self.out_features = out_features
        self.weight = _glorot_uniform(rng, (in_features, out_features),
                                      in_features, out_features, dtype)
        self.bias = np.zeros(out_features, dtype=dtype)
        self.g_weight = np.zeros_like(self.weight)
        self.g_bias = np.zeros_like(self.bias)
        self._x = None

    def params(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def grads(self):
        return [("weight", self.g_weight), ("bias", self.g_bias)]

    def forward(self, x, train=True):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeMismatchError(
                f"dense expected (b, {self.in_features}), got {x.shape}")
        self._x = x
        return x @ self.weight + self.bias

    def backward(self, upstream):
        self.g_weight = self._x.T @ upstream
        self.g_bias = upstream.sum(axis=0)
        return upstream @ self.weight.T


class SoftmaxXent:
    """Softmax + cross-entropy on integer class targets, mean-reduced.

    Computed through log-softmax with max subtraction, so extreme logits stay
    finite. Optional per-class weights rescale each sample's contribution.
    """

    def __init__(self, n_classes: int):
        self.n_classes = n_classes
        self._cache = None

    def forward(self, logits: np.ndarray, targets: np.ndarray,
                class_weights: np.ndarray | None = None):
        targets = np.asarray(targets)
        if logits.shape != (targets.shape[0], self.n_classes):
            raise ShapeMismatchError(
                f"logits {logits.shape} vs {targets.shape[0]} targets, "
                f"K={self.n_classes}")
        if targets.min(initial=0) < 0 or targets.max(initial=0) >= self.n_classes:
            raise InvalidTargetError("target class index out of range")
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        log_probs = shifted - log_z
        probs = np.exp(log_probs)
        b = logits.shape[0]
        rows = np.arange(b)
        if class_weights is None:
            weights = np.ones(b, dtype=logits.dtype)
        else:
            weights = np.asarray(class_weights, dtype=logits.dtype)[targets]
        total_w = weights.sum()
        loss = float(-(weights * log_probs[rows, targets]).sum() / total_w)
        self._cache = (probs, targets, weights, total_w)
        return loss, probs

    def backward(self) -> np.ndarray:
        probs, targets, weights, total_w = self._cache
        grad = probs.copy()
        grad[np.arange(len(targets)), targets] -= 1.0
        grad *= (weights / total_w)[:, None]
        return grad


def dense_softmax_xent(x: np.ndarray, dense: Dense, targets: np.ndarray,
                       class_weights: np.ndarray | None = None):
    """Classification head: dense projection into softmax cross-entropy.

    Returns (loss, probs, grad_x); the dense layer's gradients are filled as
    a side effect, ready for an optimizer step.
    """
    loss_fn = SoftmaxXent(dense.out_features)
    logits = dense.forward(x)
    loss, probs = loss_fn.forward(logits, targets, class_weights)
    grad_x = dense.backward(loss_fn.backward())
    return loss, probs, grad_x


class Sequential(Layer):
    """Chain of layers sharing the Layer protocol."""

    def __init__(self, layers: list[Layer]):
        self.layers = layers

    def params(self):
        return [(f"{i}.{name}", arr)
                for i, layer in enumerate(self.layers)
                for name, arr in layer.params()]

    def grads(self):
        return [(f"{i}.{name}", arr)
                for i, layer in enumerate(self.layers)
                for name, arr in layer.grads()]

    def buffers(self):
        return [(f"{i}.{name}", arr)
                for i, layer in enumerate(self.layers)
                for name, arr in layer.buffers()]

    def forward(self, x, train=True):
        for layer in self.layers:
            x = layer.forward(x, train=train)
        return x

    def backward(self, upstream):
        for layer in reversed(self.layers):
            upstream = layer.backward(upstream)
        return upstream

    def set_arrays(self, named: dict[str, np.ndarray]) -> None:
        """Overwrite parameters and buffers from a {name: array} mapping."""
        for name, arr in self.params() + self.buffers():
            arr[...] = named[name]
