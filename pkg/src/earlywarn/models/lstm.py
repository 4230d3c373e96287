"""A single recurrent layer with explicit backpropagation through time."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from ..numkit.layers import Layer


def _sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LSTMLayer(Layer):
    """(batch, time, channels) -> (batch, hidden): the final hidden state.

    Gates are packed [input, forget, cell, output] along the last axis of the
    combined projection. Weights start uniform in (-1/sqrt(H), 1/sqrt(H)) and
    the forget-gate bias slice starts at 1.0 so early training does not wipe
    the cell state. Backward runs full BPTT across every step.
    """

    def __init__(self, in_channels: int, hidden_size: int,
                 rng: np.random.Generator, dtype=np.float64):
        if in_channels < 1 or hidden_size < 1:
            raise ShapeMismatchError("lstm needs channels/hidden_size >= 1")
        self.in_channels = in_channels
        self.hidden_size = hidden_size
        limit = 1.0 / np.sqrt(hidden_size)
        self.wx = rng.uniform(-limit, limit,
                              (in_channels, 4 * hidden_size)).astype(dtype)
        self.wh = rng.uniform(-limit, limit,
                              (hidden_size, 4 * hidden_size)).astype(dtype)
        self.bias = np.zeros(4 * hidden_size, dtype=dtype)
        self.bias[hidden_size:2 * hidden_size] = 1.0
        self.g_wx = np.zeros_like(self.wx)
        self.g_wh = np.zeros_like(self.wh)
        self.g_bias = np.zeros_like(self.bias)
        self._cache = None

    def params(self):
        return [("wx", self.wx), ("wh", self.wh), ("bias", self.bias)]

    def grads(self):
        return [("wx", self.g_wx), ("wh", self.g_wh), ("bias", self.g_bias)]

    def forward(self, x, train=True):
        if x.ndim != 3 or x.shape[2] != self.in_channels:
            raise ShapeMismatchError(
                f"lstm expected (b, t, {self.in_channels}), got {x.shape}")
        b, t, _ = x.shape
        hs = self.hidden_size
        h = np.zeros((b, hs), dtype=x.dtype)
        c = np.zeros((b, hs), dtype=x.dtype)
        gates = np.empty((t, b, 4 * hs), dtype=x.dtype)
        tanh_c = np.empty((t, b, hs), dtype=x.dtype)
        h_prev = np.empty((t, b, hs), dtype=x.dtype)
        c_prev = np.empty((t, b, hs), dtype=x.dtype)
        for step in range(t):
            h_prev[step] = h
            c_prev[step] = c
            a = x[:, step, :] @ self.wx + h @ self.wh + self.bias
            i = _sigmoid(a[:, :hs])
            f = _sigmoid(a[:, hs:2 * hs])
            g = np.tanh(a[:, 2 * hs:3 * hs])
            o = _sigmoid(a[:, 3 * hs:])
            c = f * c + i * g
            tanh_c[step] = np.tanh(c)
            h = o * tanh_c[step]
            gates[step, :, :hs] = i
            gates[step, :, hs:2 * hs] = f
            gates[step, :, 2 * hs:3 * hs] = g
            gates[step, :, 3 * hs:] = o
        self._cache = (x, gates, tanh_c, h_prev, c_prev)
        return h

    def backward(self, upstream):
        x, gates, tanh_c, h_prev, c_prev = self._cache
        b, t, _ = x.shape
        hs = self.hidden_size
        g_wx = np.zeros_like(self.wx)
        g_wh = np.zeros_like(self.wh)
        g_bias = np.zeros_like(self.bias)
        g_x = np.zeros_like(x)
        dh = upstream.astype(x.dtype).copy()
        dc = np.zeros((b, hs), dtype=x.dtype)
        for step in range(t - 1, -1, -1):
            i = gates[step, :, :hs]
            f = gates[step, :, hs:2 * hs]
            g = gates[step, :, 2 * hs:3 * hs]
            o = gates[step, :, 3 * hs:]
            tc = tanh_c[step]
            dc = dc + dh * o * (1.0 - tc * tc)
            da = np.empty((b, 4 * hs), dtype=x.dtype)
            da[:, :hs] = dc * g * i * (1.0 - i)
            da[:, hs:2 * hs] = dc * c_prev[step] * f * (1.0 - f)
            da[:, 2 * hs:3 * hs] = dc * i * (1.0 - g * g)
            da[:, 3 * hs:] = dh * tc * o * (1.0 - o)
            g_wx += x[:, step, :].T @ da
            g_wh += h_prev[step].T @ da
            g_bias += da.sum(axis=0)
            g_x[:, step, :] = da @ self.wx.T
            dh = da @ self.wh.T
            dc = dc * f
        self.g_wx = g_wx
        self.g_wh = g_wh
        self.g_bias = g_bias
        return g_x
