"""From-scratch layers with hand-derived backward rules.

Everything runs in float64 on plain numpy arrays. Each layer caches what
its backward pass needs during ``forward(train=True)``; parameters are
updated in place by the optimizer, so the arrays returned by
``param_items`` stay live across training steps.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ParameterError, ShapeError


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


class Layer:
    """Base interface: forward/backward plus named parameter access."""

    def forward(self, x, train: bool = False, rng=None):
        raise NotImplementedError

    def backward(self, grad_out):
        raise NotImplementedError

    def param_items(self) -> list[tuple[str, np.ndarray]]:
        """Trainable arrays, in a fixed order."""
        return []

    def grad_items(self) -> list[tuple[str, np.ndarray]]:
        """Gradients aligned one-to-one with ``param_items``."""
        return []

    def state_items(self) -> list[tuple[str, np.ndarray]]:
        """Non-trained arrays that still define inference behavior."""
        return []


class Dense(Layer):
    """Affine map: ``y = x @ W.T + b`` with weight shape (out, in)."""

    def __init__(self, n_in: int, n_out: int, rng=None):
        self.n_in = n_in
        self.n_out = n_out
        limit = math.sqrt(6.0 / (n_in + n_out))
        if rng is None:
            self.weight = np.zeros((n_out, n_in))
        else:
            self.weight = rng.uniform(-limit, limit, size=(n_out, n_in))
        self.bias = np.zeros(n_out)
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._x = None

    def forward(self, x, train=False, rng=None):
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ShapeError(
                f"dense layer expects (batch, {self.n_in}), got {x.shape}"
            )
        self._x = x
        return x @ self.weight.T + self.bias

    def backward(self, grad_out):
        self.grad_weight = grad_out.T @ self._x
        self.grad_bias = grad_out.sum(axis=0)
        return grad_out @ self.weight

    def param_items(self):
        return [("weight", self.weight), ("bias", self.bias)]

    def grad_items(self):
        return [("weight", self.grad_weight), ("bias", self.grad_bias)]


class ReLU(Layer):
    def forward(self, x, train=False, rng=None):
        self._mask = x > 0.0
        return np.where(self._mask, x, 0.0)

    def backward(self, grad_out):
        return grad_out * self._mask


class BatchNorm(Layer):
    """Batch normalization with learned scale/shift and running stats.

    Train mode normalizes by batch statistics and nudges the running
    mean/variance by ``momentum``; inference uses the running statistics
    only and is deterministic.
    """

    def __init__(self, n: int, momentum: float = 0.9, eps: float = 1e-5):
        self.n = n
        self.momentum = momentum
        self.eps = eps
        self.scale = np.ones(n)
        self.shift = np.zeros(n)
        self.running_mean = np.zeros(n)
        self.running_var = np.ones(n)
        self.grad_scale = np.zeros_like(self.scale)
        self.grad_shift = np.zeros_like(self.shift)
        self._normed = None
        self._inv_std = None

    def forward(self, x, train=False, rng=None):
        if x.ndim != 2 or x.shape[1] != self.n:
            raise ShapeError(f"batchnorm expects (batch, {self.n}), got {x.shape}")
        if not train:
            self._normed = None
            inv = 1.0 / np.sqrt(self.running_var + self.eps)
            return self.scale * ((x - self.running_mean) * inv) + self.shift
        if x.shape[0] < 2:
            raise ParameterError(
                "batchnorm needs a batch of at least 2 in train mode (variance undefined)"
            )
        mean = x.mean(axis=0)
        var = x.var(axis=0)
        np.multiply(self.running_mean, self.momentum, out=self.running_mean)
        self.running_mean += (1.0 - self.momentum) * mean
        np.multiply(self.running_var, self.momentum, out=self.running_var)
        self.running_var += (1.0 - self.momentum) * var
        self._inv_std = 1.0 / np.sqrt(var + self.eps)
        self._normed = (x - mean) * self._inv_std
        return self.scale * self._normed + self.shift

    def backward(self, grad_out):
        if self._normed is None:
            raise ParameterError("batchnorm backward requires a train-mode forward first")
        self.grad_scale = (grad_out * self._normed).sum(axis=0)
        self.grad_shift = grad_out.sum(axis=0)
        m = grad_out.shape[0]
        # d/dx of the batch-statistics normalization, in the usual
        # collapsed form over the normalized activations.
        return (self.scale * self._inv_std / m) * (
            m * grad_out
            - self.grad_shift
            - self._normed * self.grad_scale
        )

    def param_items(self):
        return [("scale", self.scale), ("shift", self.shift)]

    def grad_items(self):
        return [("scale", self.grad_scale), ("shift", self.grad_shift)]

    def state_items(self):
        return [("running_mean", self.running_mean), ("running_var", self.running_var)]


class Dropout(Layer):
    """Inverted dropout: zero with probability ``rate`` at train time and
    scale survivors by 1/(1-rate); inference is the identity."""

    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise ParameterError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self._mask = None

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ParameterError("dropout in train mode needs a generator")
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) >= self.rate) / keep
        return x * self._mask

    def backward(self, grad_out):
        if self._mask is None:
            return grad_out
        return grad_out * self._mask

    @property
    def kept_mask(self):
        """Boolean mask of survivors from the last train-mode forward."""
        return None if self._mask is None else self._mask > 0.0


class LSTM(Layer):
    """Single LSTM layer over (batch, steps, n_in); returns the final hidden state.

    Gate pre-activations are one affine map of [x_t, h_prev] split into
    input, forget, candidate and output blocks (in that row order). The
    backward pass unrolls through time from a gradient on the final
    hidden state.
    """

    def __init__(self, n_in: int, n_hidden: int, rng=None):
        self.n_in = n_in
        self.n_hidden = n_hidden
        lim_x = math.sqrt(6.0 / (n_in + n_hidden))
        lim_h = math.sqrt(6.0 / (n_hidden + n_hidden))
        if rng is None:
            self.w_input = np.zeros((4 * n_hidden, n_in))
            self.w_hidden = np.zeros((4 * n_hidden, n_hidden))
        else:
            self.w_input = rng.uniform(-lim_x, lim_x, size=(4 * n_hidden, n_in))
            self.w_hidden = rng.uniform(-lim_h, lim_h, size=(4 * n_hidden, n_hidden))
        self.bias = np.zeros(4 * n_hidden)
        self.bias[n_hidden : 2 * n_hidden] = 1.0  # forget gate starts open
        self.grad_w_input = np.zeros_like(self.w_input)
        self.grad_w_hidden = np.zeros_like(self.w_hidden)
        self.grad_bias = np.zeros_like(self.bias)
        self._cache = None
        self._x = None

    def step(self, x_t, h_prev, c_prev):
        """One cell update; used by forward and handy for unit checks."""
        H = self.n_hidden
        a = x_t @ self.w_input.T + h_prev @ self.w_hidden.T + self.bias
        i = _sigmoid(a[..., :H])
        f = _sigmoid(a[..., H : 2 * H])
        g = np.tanh(a[..., 2 * H : 3 * H])
        o = _sigmoid(a[..., 3 * H :])
        c = f * c_prev + i * g
        h = o * np.tanh(c)
        return h, c, (i, f, g, o)

    def forward(self, x, train=False, rng=None):
        if x.ndim != 3 or x.shape[2] != self.n_in:
            raise ShapeError(
                f"lstm expects (batch, steps, {self.n_in}), got {x.shape}"
            )
        batch, steps, _ = x.shape
        h = np.zeros((batch, self.n_hidden))
        c = np.zeros((batch, self.n_hidden))
        self._x = x
        self._cache = []
        for t in range(steps):
            h_prev, c_prev = h, c
            h, c, gates = self.step(x[:, t], h_prev, c_prev)
            self._cache.append((gates, h_prev, c_prev, np.tanh(c)))
        return h

    def backward(self, grad_out):
        x = self._x
        batch, steps, _ = x.shape
        self.grad_w_input = np.zeros_like(self.w_input)
        self.grad_w_hidden = np.zeros_like(self.w_hidden)
        self.grad_bias = np.zeros_like(self.bias)
        grad_x = np.zeros_like(x)
        dh = grad_out
        dc = np.zeros_like(grad_out)
        for t in reversed(range(steps)):
            (i, f, g, o), h_prev, c_prev, tanh_c = self._cache[t]
            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c * tanh_c)
            di = dc * g
            dg = dc * i
            df = dc * c_prev
            dc = dc * f  # flows to c_{t-1}
            da = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g * g),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            self.grad_w_input += da.T @ x[:, t]
            self.grad_w_hidden += da.T @ h_prev
            self.grad_bias += da.sum(axis=0)
            grad_x[:, t] = da @ self.w_input
            dh = da @ self.w_hidden
        return grad_x

    def param_items(self):
        return [
            ("w_input", self.w_input),
            ("w_hidden", self.w_hidden),
            ("bias", self.bias),
        ]

    def grad_items(self):
        return [
            ("w_input", self.grad_w_input),
            ("w_hidden", self.grad_w_hidden),
            ("bias", self.grad_bias),
        ]


class Sequential(Layer):
    """A straight chain of layers sharing the Layer interface."""

    def __init__(self, layers):
        self.layers = list(layers)

    def forward(self, x, train=False, rng=None):
        for layer in self.layers:
            x = layer.forward(x, train=train, rng=rng)
        return x

    def backward(self, grad_out):
        for layer in reversed(self.layers):
            grad_out = layer.backward(grad_out)
        return grad_out

    def param_items(self):
        return [
            (f"{idx}.{name}", arr)
            for idx, layer in enumerate(self.layers)
            for name, arr in layer.param_items()
        ]

    def grad_items(self):
        return [
            (f"{idx}.{name}", arr)
            for idx, layer in enumerate(self.layers)
            for name, arr in layer.grad_items()
        ]

    def state_items(self):
        return [
            (f"{idx}.{name}", arr)
            for idx, layer in enumerate(self.layers)
            for name, arr in layer.state_items()
        ]
