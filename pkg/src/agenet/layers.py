"""Forward and backward passes for every layer type the CNN uses.

Each layer comes as a pair of functions ``*_forward(...) -> (out, cache)``
and ``*_backward(dout, cache) -> grads`` plus a thin class that holds the
parameters. Layer objects never mutate themselves during a pass; the
optimizer owns parameter updates.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ConfigError, DimensionError, ShapeError
from .tensor import col2im_nchw, conv_output_size, im2col_nchw, matmul, same_padding

# ---------------------------------------------------------------------------
# functional forms
# ---------------------------------------------------------------------------


def conv_forward(x, w, b, stride=1, pad=0):
    """Cross-correlation of an NCHW batch with ``w`` (outC x inC x k x k)."""
    if x.ndim != 4 or w.ndim != 4:
        raise DimensionError(f"conv expects NCHW input and 4-d kernels, got {x.shape}, {w.shape}")
    out_c, in_c, kh, kw = w.shape
    if x.shape[1] != in_c:
        raise DimensionError(f"input has {x.shape[1]} channels, kernels expect {in_c}")
    cols, (ho, wo) = im2col_nchw(x, kh, kw, stride, pad)
    w2 = w.reshape(out_c, -1)
    out = matmul(w2, cols) + b[:, None]
    out = out.reshape(out_c, x.shape[0], ho, wo).transpose(1, 0, 2, 3)
    return np.ascontiguousarray(out), (x.shape, cols, w, stride, pad)


def conv_backward(dout, cache):
    x_shape, cols, w, stride, pad = cache
    out_c, _, kh, kw = w.shape
    d2 = dout.transpose(1, 0, 2, 3).reshape(out_c, -1)
    dw = matmul(d2, cols.T).reshape(w.shape)
    db = d2.sum(axis=1)
    dcols = matmul(w.reshape(out_c, -1).T, d2)
    dx = col2im_nchw(dcols, x_shape, kh, kw, stride, pad)
    return np.ascontiguousarray(dx), dw, db


def conv_naive(x, w, b, stride=1, pad=0):
    """Nested-loop convolution. Slow; kept as a reference for tests."""
    from .tensor import pad_nchw

    n, _, h, wd = x.shape
    out_c, in_c, kh, kw = w.shape
    ho, wo = conv_output_size(h, wd, kh, kw, stride, pad)
    xp = pad_nchw(x, pad)
    out = np.zeros((n, out_c, ho, wo), dtype=x.dtype)
    for bi in range(n):
        for f in range(out_c):
            for oy in range(ho):
                for ox in range(wo):
                    acc = b[f]
                    for c in range(in_c):
                        for i in range(kh):
                            for j in range(kw):
                                acc += w[f, c, i, j] * xp[bi, c, oy * stride + i, ox * stride + j]
                    out[bi, f, oy, ox] = acc
    return out


def maxpool_forward(x, size=2, stride=2):
    if x.ndim != 4:
        raise ShapeError(f"maxpool expects NCHW input, got {x.shape}")
    h, w = x.shape[2:]
    if size > h or size > w:
        raise ShapeError(f"pool window {size}x{size} larger than input {h}x{w}")
    out, idx = kernels.maxpool_forward(np.ascontiguousarray(x), size, stride)
    return out, (x.shape, idx, size, stride)


def maxpool_backward(dout, cache):
    x_shape, idx, size, stride = cache
    return kernels.maxpool_backward(np.ascontiguousarray(dout), idx, x_shape[2], x_shape[3], size, stride)


def dense_forward(x, w, b):
    if x.ndim != 2:
        raise DimensionError(f"dense expects N x in input, got {x.shape}")
    return matmul(x, w) + b, (x, w)


def dense_backward(dout, cache):
    x, w = cache
    return matmul(dout, w.T), matmul(x.T, dout), dout.sum(axis=0)


def relu_forward(x):
    return np.maximum(x, 0), x > 0


def relu_backward(dout, cache):
    return dout * cache


def dropout_forward(x, rate, rng=None, training=False):
    """Inverted dropout; identity outside training."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x, None
    if rng is None:
        raise ConfigError("training-mode dropout needs an rng")
    keep = rng.random(x.shape) >= rate
    mask = keep.astype(x.dtype) / x.dtype.type(1.0 - rate)
    return x * mask, mask


def dropout_backward(dout, cache):
    return dout if cache is None else dout * cache


def softmax(z):
    z = np.asarray(z)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def flatten_forward(x):
    return x.reshape(x.shape[0], -1), x.shape


def flatten_backward(dout, cache):
    return dout.reshape(cache)


# ---------------------------------------------------------------------------
# layer objects
# ---------------------------------------------------------------------------


class Layer:
    """Base class. ``params`` maps a short name (``W``/``b``) to an array."""

    kind = "layer"

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}

    def output_shape(self, in_shape):
        return in_shape

    def forward(self, x, training=False, rng=None):
        raise NotImplementedError

    def backward(self, dout, cache):
        """Return ``(dx, grads)`` where grads mirrors ``params``."""
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


class Conv2D(Layer):
    kind = "conv"

    def __init__(self, weight, bias, stride=1, padding="same"):
        super().__init__()
        if weight.ndim != 4 or weight.shape[2] != weight.shape[3]:
            raise ShapeError(f"conv kernels must be outC x inC x k x k, got {weight.shape}")
        if stride < 1:
            raise ConfigError(f"stride must be >= 1, got {stride}")
        self.params = {"W": weight, "b": bias}
        self.stride = int(stride)
        self.padding = padding

    @property
    def kernel_size(self):
        return self.params["W"].shape[2]

    def resolve_pad(self, h, w):
        if self.padding == "same":
            k = self.kernel_size
            return same_padding(h, k, self.stride) + same_padding(w, k, self.stride)
        if self.padding == "valid":
            return 0
        return self.padding

    def output_shape(self, in_shape):
        c, h, w = in_shape
        if c != self.params["W"].shape[1]:
            raise DimensionError(f"input has {c} channels, kernels expect {self.params['W'].shape[1]}")
        k = self.kernel_size
        ho, wo = conv_output_size(h, w, k, k, self.stride, self.resolve_pad(h, w))
        return (self.params["W"].shape[0], ho, wo)

    def forward(self, x, training=False, rng=None):
        pad = self.resolve_pad(x.shape[2], x.shape[3])
        return conv_forward(x, self.params["W"], self.params["b"], self.stride, pad)

    def backward(self, dout, cache):
        dx, dw, db = conv_backward(dout, cache)
        return dx, {"W": dw, "b": db}

    def __repr__(self):
        o, i, k, _ = self.params["W"].shape
        return f"Conv2D({i}->{o}, k={k}, stride={self.stride}, padding={self.padding!r})"


class ReLU(Layer):
    kind = "relu"

    def forward(self, x, training=False, rng=None):
        return relu_forward(x)

    def backward(self, dout, cache):
        return relu_backward(dout, cache), {}


class MaxPool2D(Layer):
    kind = "pool"

    def __init__(self, size=2, stride=2):
        super().__init__()
        self.size = size
        self.stride = stride

    def output_shape(self, in_shape):
        c, h, w = in_shape
        if self.size > h or self.size > w:
            raise ShapeError(f"pool window {self.size}x{self.size} larger than input {h}x{w}")
        return (c, (h - self.size) // self.stride + 1, (w - self.size) // self.stride + 1)

    def forward(self, x, training=False, rng=None):
        return maxpool_forward(x, self.size, self.stride)

    def backward(self, dout, cache):
        return maxpool_backward(dout, cache), {}

    def __repr__(self):
        return f"MaxPool2D({self.size}, stride={self.stride})"


class Dropout(Layer):
    kind = "dropout"

    def __init__(self, rate):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = float(rate)

    def forward(self, x, training=False, rng=None):
        return dropout_forward(x, self.rate, rng, training)

    def backward(self, dout, cache):
        return dropout_backward(dout, cache), {}

    def __repr__(self):
        return f"Dropout({self.rate})"


class Flatten(Layer):
    kind = "flatten"

    def output_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x, training=False, rng=None):
        return flatten_forward(x)

    def backward(self, dout, cache):
        return flatten_backward(dout, cache), {}


class Dense(Layer):
    kind = "dense"

    def __init__(self, weight, bias):
        super().__init__()
        if weight.ndim != 2 or bias.shape != (weight.shape[1],):
            raise ShapeError(f"dense weight {weight.shape} / bias {bias.shape} mismatch")
        self.params = {"W": weight, "b": bias}

    def output_shape(self, in_shape):
        if in_shape != (self.params["W"].shape[0],):
            raise DimensionError(f"dense layer expects ({self.params['W'].shape[0]},), got {in_shape}")
        return (self.params["W"].shape[1],)

    def forward(self, x, training=False, rng=None):
        return dense_forward(x, self.params["W"], self.params["b"])

    def backward(self, dout, cache):
        dx, dw, db = dense_backward(dout, cache)
        return dx, {"W": dw, "b": db}

    def __repr__(self):
        i, o = self.params["W"].shape
        return f"Dense({i}->{o})"
