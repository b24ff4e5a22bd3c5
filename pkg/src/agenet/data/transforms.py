"""Geometric image operations on CHW float arrays."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import ConfigError, ShapeError, ValidationError

TARGET_SIZE = 256


def margin_box(bbox, height: int, width: int, margin: float = 0.40):
    """Grow ``bbox = (x0, y0, x1, y1)`` by ``margin`` of its size per side.

    Coordinates are pixel edges (``x1``/``y1`` exclusive). The result is
    widened outward to whole pixels and clamped to the image.
    """
    x0, y0, x1, y1 = (float(v) for v in bbox)
    if x1 <= x0 or y1 <= y0:
        raise ValidationError(f"degenerate bounding box {tuple(bbox)}")
    if margin < 0:
        raise ValidationError(f"margin must be non-negative, got {margin}")
    dx = margin * (x1 - x0)
    dy = margin * (y1 - y0)
    cx0 = max(0, math.floor(x0 - dx + 1e-9))
    cy0 = max(0, math.floor(y0 - dy + 1e-9))
    cx1 = min(width, math.ceil(x1 + dx - 1e-9))
    cy1 = min(height, math.ceil(y1 + dy - 1e-9))
    if cx1 <= cx0 or cy1 <= cy0:
        raise ValidationError(f"bounding box {tuple(bbox)} lies outside the {width}x{height} image")
    return cx0, cy0, cx1, cy1


def crop_with_margin(image, bbox, margin: float = 0.40):
    _, h, w = image.shape
    x0, y0, x1, y1 = margin_box(bbox, h, w, margin)
    return image[:, y0:y1, x0:x1]


def resize_bilinear(image, target=TARGET_SIZE):
    """Corner-aligned bilinear resize of a CHW image to ``target`` (int or (h, w))."""
    image = np.asarray(image)
    if image.ndim != 3 or image.size == 0:
        raise ShapeError(f"expected a non-empty C x H x W image, got {image.shape}")
    ho, wo = (target, target) if np.isscalar(target) else target
    if ho < 1 or wo < 1:
        raise ShapeError(f"target size must be positive, got {(ho, wo)}")
    return kernels.resize_bilinear(np.ascontiguousarray(image, dtype=np.float64), int(ho), int(wo))


def hflip(image):
    return image[:, :, ::-1].copy()


def rotate(image, degrees: float, fill: float = 0.0):
    """Rotate counter-clockwise (as displayed) about the image center."""
    t = math.radians(degrees)
    c, s = math.cos(t), math.sin(t)
    img = np.ascontiguousarray(image, dtype=np.float64)
    return kernels.affine_warp(img, c, s, -s, c, float(fill))


def zoom(image, factor: float, fill: float = 0.0):
    """Scale about the center: factor > 1 zooms in, < 1 zooms out with fill."""
    if factor <= 0:
        raise ValidationError(f"zoom factor must be positive, got {factor}")
    inv = 1.0 / factor
    img = np.ascontiguousarray(image, dtype=np.float64)
    return kernels.affine_warp(img, inv, 0.0, 0.0, inv, float(fill))


@dataclass(frozen=True)
class AugmentConfig:
    flip_prob: float = 0.5
    max_rotation_deg: float = 15.0
    zoom_range: tuple = (0.85, 1.15)
    fill: float = 0.0

    def __post_init__(self):
        lo, hi = self.zoom_range
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ConfigError(f"flip_prob must be in [0, 1], got {self.flip_prob}")
        if self.max_rotation_deg < 0:
            raise ConfigError("max_rotation_deg must be >= 0")
        if not (0 < lo <= 1.0 <= hi):
            raise ConfigError(f"zoom_range must satisfy 0 < min <= 1 <= max, got {self.zoom_range}")

    @classmethod
    def null(cls):
        return cls(0.0, 0.0, (1.0, 1.0))


def augment(image, cfg: AugmentConfig, rng: np.random.Generator):
    """Random flip, then rotation, then zoom. Always consumes three draws."""
    flip = rng.random() < cfg.flip_prob
    angle = rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg)
    factor = rng.uniform(*cfg.zoom_range)
    out = image
    if flip:
        out = hflip(out)
    if angle != 0.0:
        out = rotate(out, angle, cfg.fill)
    if factor != 1.0:
        out = zoom(out, factor, cfg.fill)
    return out


def augment_batch(batch, cfg: AugmentConfig, rng: np.random.Generator):
    out = np.empty_like(batch)
    for i, img in enumerate(batch):
        out[i] = augment(img, cfg, rng)
    return out
