"""Array primitives the layers are built on.

Tensors are plain contiguous numpy arrays (row-major, NCHW for batches) of
dtype float32 or float64. This module adds the shape checking and the
lowering helpers (``im2col``/``col2im``) that numpy does not provide.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import DimensionError, ShapeError

DTYPES = {"f32": np.float32, "f64": np.float64}


def as_dtype(dtype) -> np.dtype:
    """Accept ``"f32"``/``"f64"`` or anything numpy understands."""
    if isinstance(dtype, str) and dtype in DTYPES:
        dtype = DTYPES[dtype]
    dt = np.dtype(dtype)
    if dt not in (np.float32, np.float64):
        raise ShapeError(f"unsupported dtype {dt}; use float32 or float64")
    return dt


def make_rng(seed: int) -> np.random.Generator:
    """A PCG64 generator: same seed, same stream on every platform."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(seed: int, n: int) -> list[int]:
    """Derive ``n`` independent 64-bit seeds from one parent seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    if a.dtype != b.dtype:
        raise DimensionError(f"dtype mismatch: {a.dtype} vs {b.dtype}")
    return a @ b


def argmax(v: np.ndarray) -> int:
    """Index of the maximum; ties go to the lowest index."""
    v = np.asarray(v)
    if v.size == 0:
        raise ShapeError("argmax of an empty vector")
    return int(np.argmax(v))


def random_init(shape, fan_in: int, rng: np.random.Generator, dtype=np.float32) -> np.ndarray:
    """He-normal weights, std = sqrt(2 / fan_in)."""
    if fan_in < 1:
        raise ShapeError(f"fan_in must be >= 1, got {fan_in}")
    std = np.sqrt(2.0 / fan_in)
    return (rng.standard_normal(shape) * std).astype(as_dtype(dtype))


def zeros_bias(n: int, dtype=np.float32) -> np.ndarray:
    return np.zeros(n, dtype=as_dtype(dtype))


def same_padding(size: int, k: int, stride: int) -> tuple[int, int]:
    """TensorFlow-style ``same`` padding (before, after) along one axis.

    The output length is ``ceil(size / stride)``; when the total padding is
    odd the extra row/column goes after the input.
    """
    out = -(-size // stride)
    total = max((out - 1) * stride + k - size, 0)
    return total // 2, total - total // 2


def _norm_pad(pad) -> tuple[int, int, int, int]:
    if isinstance(pad, (int, np.integer)):
        p = int(pad)
        return p, p, p, p
    pad = tuple(int(p) for p in pad)
    if len(pad) == 2:
        return pad[0], pad[0], pad[1], pad[1]
    if len(pad) != 4:
        raise ShapeError(f"pad must be an int, (ph, pw) or (top, bottom, left, right); got {pad}")
    return pad


def conv_output_size(h: int, w: int, kh: int, kw: int, stride: int, pad) -> tuple[int, int]:
    top, bottom, left, right = _norm_pad(pad)
    span_h = h + top + bottom - kh
    span_w = w + left + right - kw
    if span_h < 0 or span_w < 0 or span_h % stride or span_w % stride:
        raise ShapeError(
            f"kernel {kh}x{kw}, stride {stride}, pad {(top, bottom, left, right)} "
            f"does not tile a {h}x{w} input"
        )
    return span_h // stride + 1, span_w // stride + 1


def pad_nchw(x: np.ndarray, pad) -> np.ndarray:
    top, bottom, left, right = _norm_pad(pad)
    if not (top or bottom or left or right):
        return np.ascontiguousarray(x)
    return np.pad(x, ((0, 0), (0, 0), (top, bottom), (left, right)))


def im2col_nchw(x: np.ndarray, kh: int, kw: int, stride: int, pad=0):
    """Batch im2col. Returns ``(cols, (ho, wo))`` with cols of shape
    ``(C*kh*kw, N*ho*wo)``."""
    if x.ndim != 4:
        raise ShapeError(f"expected an NCHW batch, got shape {x.shape}")
    ho, wo = conv_output_size(x.shape[2], x.shape[3], kh, kw, stride, pad)
    xp = pad_nchw(x, pad)
    return kernels.im2col_batch(xp, kh, kw, stride, ho, wo), (ho, wo)


def col2im_nchw(cols: np.ndarray, x_shape, kh: int, kw: int, stride: int, pad=0) -> np.ndarray:
    """Adjoint of :func:`im2col_nchw`: scatter-add columns back to NCHW."""
    n, c, h, w = x_shape
    top, bottom, left, right = _norm_pad(pad)
    ho, wo = conv_output_size(h, w, kh, kw, stride, pad)
    hp, wp = h + top + bottom, w + left + right
    if cols.shape != (c * kh * kw, n * ho * wo):
        raise DimensionError(f"columns {cols.shape} do not match input {tuple(x_shape)}")
    out = kernels.col2im_batch(np.ascontiguousarray(cols), n, c, hp, wp, kh, kw, stride, ho, wo)
    return out[:, :, top : top + h, left : left + w]


def im2col(x: np.ndarray, kh: int, kw: int, stride: int = 1, pad=0) -> np.ndarray:
    """Single-image im2col: ``C x H x W -> (C*kh*kw) x (ho*wo)``."""
    if x.ndim != 3:
        raise ShapeError(f"expected a CxHxW image, got shape {x.shape}")
    cols, _ = im2col_nchw(x[None], kh, kw, stride, pad)
    return cols


def col2im(cols: np.ndarray, x_shape, kh: int, kw: int, stride: int = 1, pad=0) -> np.ndarray:
    c, h, w = x_shape
    return col2im_nchw(cols, (1, c, h, w), kh, kw, stride, pad)[0]
