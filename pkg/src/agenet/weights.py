"""Self-describing weight files.

Layout (all integers little-endian)::

    b"AGENETWT"                 magic
    u16  version                currently 1
    u32  n, n bytes             model config as UTF-8 ``key=value`` lines
    u32  record count
    per record:
        u16 layer index, u8 param name (b"W"/b"b"), u8 itemsize (4 or 8),
        u8 ndim, ndim * u32 dims, payload (little-endian float)
"""
from __future__ import annotations

import struct

import numpy as np

from .errors import (
    WeightConfigMismatch,
    WeightFileError,
    WeightMagicError,
    WeightTruncatedError,
    WeightVersionError,
)
from .fileio import write_bytes
from .model import ModelConfig, Network, build
from .tensor import make_rng

MAGIC = b"AGENETWT"
VERSION = 1
_HEAD = struct.Struct("<8sH")
_U32 = struct.Struct("<I")
_REC = struct.Struct("<HcBB")
_DT = {4: "<f4", 8: "<f8"}


def header_size(config_text: str) -> int:
    return _HEAD.size + _U32.size + len(config_text.encode("utf-8")) + _U32.size


def record_header_size(ndim: int) -> int:
    return _REC.size + 4 * ndim


def _config_block(net: Network, meta: dict | None) -> str:
    text = net.config.to_text()
    for k, v in (meta or {}).items():
        text += f"#{k}={v}\n"
    return text


def dumps(net: Network, meta: dict | None = None) -> bytes:
    cfg = _config_block(net, meta).encode("utf-8")
    parts = [_HEAD.pack(MAGIC, VERSION), _U32.pack(len(cfg)), cfg]
    records = list(net.named_parameters())
    parts.append(_U32.pack(len(records)))
    for layer_idx, name, p in records:
        parts.append(_REC.pack(layer_idx, name.encode("ascii"), p.dtype.itemsize, p.ndim))
        parts.append(struct.pack(f"<{p.ndim}I", *p.shape))
        parts.append(np.ascontiguousarray(p).astype(_DT[p.dtype.itemsize], copy=False).tobytes())
    return b"".join(parts)


def save_weights(net: Network, path, meta: dict | None = None) -> None:
    write_bytes(path, dumps(net, meta))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise WeightTruncatedError(f"weight file truncated at byte {len(self.data)} (needed {self.pos + n})")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))


def loads(data: bytes, config: ModelConfig | None = None) -> Network:
    r = _Reader(data)
    if len(data) < len(MAGIC) and MAGIC.startswith(bytes(data)):
        raise WeightTruncatedError(f"weight file ends after {len(data)} bytes, inside the magic")
    if data[: len(MAGIC)] != MAGIC:
        raise WeightMagicError("not an agenet weight file (bad magic)")
    _, version = r.unpack(_HEAD)
    if version != VERSION:
        raise WeightVersionError(f"unsupported weight file version {version} (expected {VERSION})")
    (n,) = r.unpack(_U32)
    try:
        text = r.take(n).decode("utf-8")
    except UnicodeDecodeError:
        raise WeightFileError("config block is not valid UTF-8") from None
    stored = ModelConfig.from_text(text)
    if config is not None and config != stored:
        raise WeightConfigMismatch(f"weights were saved for a different architecture:\n{text}")
    meta = {}
    for line in text.splitlines():
        if line.startswith("#") and "=" in line:
            k, _, v = line[1:].partition("=")
            meta[k] = v
    (count,) = r.unpack(_U32)
    arrays, itemsize = [], None
    for _ in range(count):
        layer_idx, name, size, ndim = r.unpack(_REC)
        if size not in _DT:
            raise WeightFileError(f"unsupported item size {size}")
        shape = struct.unpack(f"<{ndim}I", r.take(4 * ndim))
        nbytes = int(np.prod(shape, dtype=np.int64)) * size
        arr = np.frombuffer(r.take(nbytes), dtype=_DT[size]).reshape(shape)
        arrays.append((layer_idx, name.decode("ascii"), arr))
        itemsize = size
    if r.pos != len(data):
        raise WeightFileError(f"{len(data) - r.pos} trailing bytes after the last record")
    dtype = np.float64 if itemsize == 8 else np.float32
    net = build(stored, make_rng(0), dtype)
    expected = [(i, nm, p.shape) for i, nm, p in net.named_parameters()]
    found = [(i, nm, a.shape) for i, nm, a in arrays]
    if expected != found:
        raise WeightConfigMismatch("parameter records do not match the stored config")
    net.set_params([a.astype(dtype) for _, _, a in arrays])
    net.meta = meta
    return net


def load_weights(path, config: ModelConfig | None = None) -> Network:
    with open(path, "rb") as fh:
        return loads(fh.read(), config)
