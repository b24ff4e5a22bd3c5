"""Binary PPM (P6) / PGM (P5) reading and writing, maxval 255 only.

Images are returned as uint8 arrays: ``3 x H x W`` for PPM and ``H x W``
for PGM.
"""
from __future__ import annotations

import numpy as np

from ..errors import ImageFormatError
from ..fileio import write_bytes


def _tokens(data: bytes, count: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out, pos = [], 0
    while len(out) < count:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise ImageFormatError("truncated PNM header")
        if data[pos : pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        out.append(data[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return out, pos + 1


def decode_pnm(data: bytes) -> np.ndarray:
    (magic, w, h, maxval), pos = _tokens(data, 4)
    if magic not in (b"P6", b"P5"):
        raise ImageFormatError(f"unsupported image type {magic!r}; only P6/P5 are read")
    try:
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise ImageFormatError("non-numeric PNM header field") from None
    if maxval != 255:
        raise ImageFormatError(f"maxval {maxval} not supported (need 255)")
    if w < 1 or h < 1:
        raise ImageFormatError(f"empty image {w}x{h}")
    channels = 3 if magic == b"P6" else 1
    need = w * h * channels
    raster = data[pos : pos + need]
    if len(raster) != need:
        raise ImageFormatError(f"raster truncated: {len(raster)} of {need} bytes")
    arr = np.frombuffer(raster, dtype=np.uint8)
    if channels == 3:
        return arr.reshape(h, w, 3).transpose(2, 0, 1).copy()
    return arr.reshape(h, w).copy()


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        img = decode_pnm(fh.read())
    if img.ndim == 2:
        img = np.repeat(img[None], 3, axis=0)
    return img


def to_uint8(img) -> np.ndarray:
    return np.clip(np.rint(np.asarray(img, dtype=np.float64)), 0, 255).astype(np.uint8)


def encode_ppm(img) -> bytes:
    img = to_uint8(img)
    if img.ndim != 3 or img.shape[0] != 3:
        raise ImageFormatError(f"PPM needs a 3 x H x W image, got {img.shape}")
    _, h, w = img.shape
    return b"P6\n%d %d\n255\n" % (w, h) + img.transpose(1, 2, 0).tobytes()


def encode_pgm(img) -> bytes:
    img = to_uint8(img)
    if img.ndim != 2:
        raise ImageFormatError(f"PGM needs an H x W image, got {img.shape}")
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def write_ppm(path, img) -> None:
    write_bytes(path, encode_ppm(img))


def write_pgm(path, img) -> None:
    write_bytes(path, encode_pgm(img))
