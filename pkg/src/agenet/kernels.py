"""Hot inner loops, in two interchangeable implementations.

Every kernel exists as ``_nb_<name>`` (numba, explicit loops) and
``_np_<name>`` (vectorised numpy). The public name is bound to one of them
at import time according to ``agenet._jit.USE_NUMBA`` (im2col excepted,
see the bindings at the bottom). Both paths are kept
importable so tests and ``benchmarks/bench_kernels.py`` can compare them.

Layout conventions shared by all kernels:

* images and activations are NCHW (or CHW for single images);
* ``im2col`` columns are ordered ``n, oy, ox`` and rows ``c, ki, kj``;
* pooling indices are the row-major offset of the winner inside its window.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._jit import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# im2col / col2im on an already padded NCHW batch
# ---------------------------------------------------------------------------


@njit
def _nb_im2col(xp, kh, kw, stride, ho, wo):
    n, c, _, _ = xp.shape
    cols = np.empty((c * kh * kw, n * ho * wo), dtype=xp.dtype)
    for ci in range(c):
        for i in range(kh):
            for j in range(kw):
                row = (ci * kh + i) * kw + j
                for b in range(n):
                    base = b * ho * wo
                    for oy in range(ho):
                        y = oy * stride + i
                        for ox in range(wo):
                            cols[row, base + oy * wo + ox] = xp[b, ci, y, ox * stride + j]
    return cols


def _np_im2col(xp, kh, kw, stride, ho, wo):
    n, c = xp.shape[:2]
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    win = win[:, :, : (ho - 1) * stride + 1 : stride, : (wo - 1) * stride + 1 : stride]
    # (n, c, ho, wo, kh, kw) -> (c, kh, kw, n, ho, wo)
    return np.ascontiguousarray(win.transpose(1, 4, 5, 0, 2, 3)).reshape(c * kh * kw, n * ho * wo)


@njit
def _nb_col2im(cols, n, c, hp, wp, kh, kw, stride, ho, wo):
    out = np.zeros((n, c, hp, wp), dtype=cols.dtype)
    for ci in range(c):
        for i in range(kh):
            for j in range(kw):
                row = (ci * kh + i) * kw + j
                for b in range(n):
                    base = b * ho * wo
                    for oy in range(ho):
                        y = oy * stride + i
                        for ox in range(wo):
                            out[b, ci, y, ox * stride + j] += cols[row, base + oy * wo + ox]
    return out


def _np_col2im(cols, n, c, hp, wp, kh, kw, stride, ho, wo):
    out = np.zeros((n, c, hp, wp), dtype=cols.dtype)
    c6 = cols.reshape(c, kh, kw, n, ho, wo)
    ys, xs = (ho - 1) * stride + 1, (wo - 1) * stride + 1
    for i in range(kh):
        for j in range(kw):
            out[:, :, i : i + ys : stride, j : j + xs : stride] += c6[:, i, j].transpose(1, 0, 2, 3)
    return out


# ---------------------------------------------------------------------------
# max pooling (floor mode, no padding)
# ---------------------------------------------------------------------------


@njit
def _nb_maxpool_forward(x, size, stride):
    n, c, h, w = x.shape
    ho = (h - size) // stride + 1
    wo = (w - size) // stride + 1
    out = np.empty((n, c, ho, wo), dtype=x.dtype)
    idx = np.empty((n, c, ho, wo), dtype=np.int64)
    for b in range(n):
        for ci in range(c):
            for oy in range(ho):
                for ox in range(wo):
                    y0 = oy * stride
                    x0 = ox * stride
                    best = x[b, ci, y0, x0]
                    arg = 0
                    for i in range(size):
                        for j in range(size):
                            v = x[b, ci, y0 + i, x0 + j]
                            if v > best:
                                best = v
                                arg = i * size + j
                    out[b, ci, oy, ox] = best
                    idx[b, ci, oy, ox] = arg
    return out, idx


def _np_maxpool_forward(x, size, stride):
    h, w = x.shape[2:]
    ho = (h - size) // stride + 1
    wo = (w - size) // stride + 1
    win = sliding_window_view(x, (size, size), axis=(2, 3))
    win = win[:, :, : (ho - 1) * stride + 1 : stride, : (wo - 1) * stride + 1 : stride]
    flat = win.reshape(win.shape[:4] + (size * size,))
    idx = np.argmax(flat, axis=-1)
    out = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(out), idx.astype(np.int64)


@njit
def _nb_maxpool_backward(dout, idx, h, w, size, stride):
    n, c, ho, wo = dout.shape
    dx = np.zeros((n, c, h, w), dtype=dout.dtype)
    for b in range(n):
        for ci in range(c):
            for oy in range(ho):
                for ox in range(wo):
                    k = idx[b, ci, oy, ox]
                    dx[b, ci, oy * stride + k // size, ox * stride + k % size] += dout[b, ci, oy, ox]
    return dx


def _np_maxpool_backward(dout, idx, h, w, size, stride):
    n, c, ho, wo = dout.shape
    dx = np.zeros((n, c, h, w), dtype=dout.dtype)
    ys, xs = (ho - 1) * stride + 1, (wo - 1) * stride + 1
    for i in range(size):
        for j in range(size):
            hit = idx == i * size + j
            dx[:, :, i : i + ys : stride, j : j + xs : stride] += np.where(hit, dout, 0)
    return dx


# ---------------------------------------------------------------------------
# image resampling (CHW float64)
# ---------------------------------------------------------------------------


@njit
def _nb_resize_bilinear(img, ho, wo):
    c, h, w = img.shape
    out = np.empty((c, ho, wo), dtype=np.float64)
    for oy in range(ho):
        sy = oy * (h - 1) / (ho - 1) if ho > 1 else 0.0
        y0 = int(np.floor(sy))
        y1 = min(y0 + 1, h - 1)
        fy = sy - y0
        for ox in range(wo):
            sx = ox * (w - 1) / (wo - 1) if wo > 1 else 0.0
            x0 = int(np.floor(sx))
            x1 = min(x0 + 1, w - 1)
            fx = sx - x0
            for ci in range(c):
                top = img[ci, y0, x0] * (1.0 - fx) + img[ci, y0, x1] * fx
                bot = img[ci, y1, x0] * (1.0 - fx) + img[ci, y1, x1] * fx
                out[ci, oy, ox] = top * (1.0 - fy) + bot * fy
    return out


def _axis_weights(n_in, n_out):
    if n_out > 1:
        s = np.arange(n_out) * (n_in - 1) / (n_out - 1)
    else:
        s = np.zeros(1)
    i0 = np.floor(s).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, s - i0


def _np_resize_bilinear(img, ho, wo):
    _, h, w = img.shape
    y0, y1, fy = _axis_weights(h, ho)
    x0, x1, fx = _axis_weights(w, wo)
    fx = fx[None, None, :]
    fy = fy[None, :, None]
    rows0 = img[:, y0]
    rows1 = img[:, y1]
    top = rows0[:, :, x0] * (1.0 - fx) + rows0[:, :, x1] * fx
    bot = rows1[:, :, x0] * (1.0 - fx) + rows1[:, :, x1] * fx
    return top * (1.0 - fy) + bot * fy


@njit
def _nb_affine_warp(img, m00, m01, m10, m11, fill):
    c, h, w = img.shape
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    out = np.empty((c, h, w), dtype=np.float64)
    for oy in range(h):
        ry = oy - cy
        for ox in range(w):
            rx = ox - cx
            sy = m00 * ry + m01 * rx + cy
            sx = m10 * ry + m11 * rx + cx
            y0 = int(np.floor(sy))
            x0 = int(np.floor(sx))
            fy = sy - y0
            fx = sx - x0
            for ci in range(c):
                acc = 0.0
                for dy in range(2):
                    wy = fy if dy == 1 else 1.0 - fy
                    yy = y0 + dy
                    for dx in range(2):
                        wx = fx if dx == 1 else 1.0 - fx
                        xx = x0 + dx
                        wt = wy * wx
                        if wt == 0.0:
                            continue
                        if 0 <= yy < h and 0 <= xx < w:
                            acc += wt * img[ci, yy, xx]
                        else:
                            acc += wt * fill
                out[ci, oy, ox] = acc
    return out


def _np_affine_warp(img, m00, m01, m10, m11, fill):
    c, h, w = img.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ry = (np.arange(h) - cy)[:, None]
    rx = (np.arange(w) - cx)[None, :]
    sy = m00 * ry + m01 * rx + cy
    sx = m10 * ry + m11 * rx + cx
    y0 = np.floor(sy).astype(np.int64)
    x0 = np.floor(sx).astype(np.int64)
    fy = sy - y0
    fx = sx - x0
    out = np.zeros((c, h, w), dtype=np.float64)
    for dy in range(2):
        wy = fy if dy == 1 else 1.0 - fy
        yy = y0 + dy
        for dx in range(2):
            wx = fx if dx == 1 else 1.0 - fx
            xx = x0 + dx
            wt = wy * wx
            inside = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
            vals = img[:, np.clip(yy, 0, h - 1), np.clip(xx, 0, w - 1)]
            vals = np.where(inside[None], vals, fill)
            out += np.where(wt[None] == 0.0, 0.0, wt[None] * vals)
    return out


# im2col is a pure strided copy that numpy already does faster than the
# jitted loop (see benchmarks/bench_kernels.py), so both backends use it.
im2col_batch = _np_im2col

if USE_NUMBA:
    BACKEND = "numba"
    col2im_batch = _nb_col2im
    maxpool_forward = _nb_maxpool_forward
    maxpool_backward = _nb_maxpool_backward
    resize_bilinear = _nb_resize_bilinear
    affine_warp = _nb_affine_warp
else:
    BACKEND = "numpy"
    col2im_batch = _np_col2im
    maxpool_forward = _np_maxpool_forward
    maxpool_backward = _np_maxpool_backward
    resize_bilinear = _np_resize_bilinear
    affine_warp = _np_affine_warp
