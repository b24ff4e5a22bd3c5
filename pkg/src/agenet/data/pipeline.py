"""Crop, resize and bin raw images into a processed sample store."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

from ..errors import AgeNetIOError
from .bins import TRAINING_BINS, BinScheme
from .imageio import encode_ppm, read_ppm
from .manifest import Manifest, write_manifest
from .transforms import TARGET_SIZE, crop_with_margin, resize_bilinear
from ..fileio import write_bytes


def process_image(image, bbox=None, margin: float = 0.40, size: int = TARGET_SIZE):
    """Crop around ``bbox`` (if any) and resize to ``3 x size x size``."""
    if bbox is not None:
        image = crop_with_margin(image, bbox, margin)
    return resize_bilinear(image, size)


def _work(args):
    src, bbox, margin, size, dst = args
    try:
        img = read_ppm(src)
    except AgeNetIOError:
        raise
    except OSError as exc:
        raise AgeNetIOError(f"cannot read image {src}: {exc.strerror}") from None
    write_bytes(dst, encode_ppm(process_image(img, bbox, margin, size)))
    return dst


def preprocess(manifest: Manifest, out_dir, margin=0.40, size=TARGET_SIZE,
               scheme: BinScheme = TRAINING_BINS, jobs: int = 1, meta=None) -> Manifest:
    """Write one PPM per record under ``out_dir/images`` plus ``out_dir/manifest.csv``.

    Output order and bytes do not depend on ``jobs``.
    """
    out_dir = os.path.abspath(out_dir)
    img_dir = os.path.join(out_dir, "images")
    os.makedirs(img_dir, exist_ok=True)
    tasks, records = [], []
    for i, r in enumerate(manifest.records):
        stem = os.path.splitext(os.path.basename(r.path))[0]
        name = f"{i:06d}_{stem}.ppm"
        tasks.append((manifest.resolve(r), r.bbox, margin, size, os.path.join(img_dir, name)))
        records.append(replace(r, path=f"images/{name}", bbox=None, label=scheme.assign(r.age)))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_work, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        for t in tasks:
            _work(t)
    processed = Manifest(records, out_dir, manifest.meta)
    write_manifest(processed, os.path.join(out_dir, "manifest.csv"), meta)
    return processed
