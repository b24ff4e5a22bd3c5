"""Sample manifests: CSV I/O, splitting, statistics and the mislabel filter.

Manifest CSV columns are ``path,age,x0,y0,x1,y1,source`` with an optional
trailing ``class`` column on processed manifests. Bounding-box fields are
empty for pre-cropped images. Lines starting with ``#`` carry ``key=value``
metadata (the run seed, for instance) and are otherwise ignored. Relative
image paths resolve against the manifest's own directory.
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from ..errors import AgeNetIOError, ValidationError
from ..fileio import write_text
from ..tensor import make_rng
from .bins import TRAINING_BINS, BinScheme
from .imageio import read_ppm

COLUMNS = ["path", "age", "x0", "y0", "x1", "y1", "source"]
SOURCES = ("APPA", "UTK", "IMDB", "OTHER")
MAX_AGE = 130


@dataclass(frozen=True)
class SampleRecord:
    path: str
    age: int
    bbox: tuple | None = None
    source: str = "OTHER"
    label: int | None = None

    def __post_init__(self):
        if not 0 <= self.age <= MAX_AGE:
            raise ValidationError(f"{self.path}: age {self.age} outside 0..{MAX_AGE}")
        if self.source not in SOURCES:
            raise ValidationError(f"{self.path}: unknown source {self.source!r}")
        if self.bbox is not None:
            x0, y0, x1, y1 = self.bbox
            if x1 <= x0 or y1 <= y0:
                raise ValidationError(f"{self.path}: degenerate bounding box {self.bbox}")


class Manifest:
    def __init__(self, records, root=".", meta=None):
        self.records = list(records)
        self.root = os.fspath(root)
        self.meta = dict(meta or {})
        seen = set()
        for r in self.records:
            if r.path in seen:
                raise ValidationError(f"duplicate manifest entry {r.path!r}")
            seen.add(r.path)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def resolve(self, record: SampleRecord) -> str:
        return os.path.normpath(os.path.join(self.root, record.path))

    def subset(self, indices) -> "Manifest":
        return Manifest([self.records[i] for i in indices], self.root, self.meta)

    def ages(self) -> np.ndarray:
        return np.array([r.age for r in self.records], dtype=np.int64)

    def labels(self, scheme: BinScheme = TRAINING_BINS) -> np.ndarray:
        """Class indices: the stored ``class`` column, else the age's bin."""
        return np.array(
            [r.label if r.label is not None else scheme.assign(r.age) for r in self.records],
            dtype=np.int64,
        )


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _parse_int(text, what, where):
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"{where}: {what} {text!r} is not an integer") from None


def parse_manifest(text: str, root=".") -> Manifest:
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, _, v = tok.partition("=")
                    meta[k] = v
        elif line.strip():
            body.append(line)
    if not body:
        raise ValidationError("manifest has no header row")
    reader = csv.DictReader(io.StringIO("\n".join(body)))
    missing = [c for c in COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValidationError(f"manifest header lacks columns {missing}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        where = f"manifest row {lineno}"
        box = [row[k].strip() for k in ("x0", "y0", "x1", "y1")]
        if all(box):
            bbox = tuple(_parse_int(v, "bbox", where) for v in box)
        elif any(box):
            raise ValidationError(f"{where}: bounding box partially filled")
        else:
            bbox = None
        label = row.get("class")
        label = _parse_int(label, "class", where) if label not in (None, "") else None
        source = (row["source"] or "OTHER").strip().upper()
        records.append(
            SampleRecord(row["path"].strip(), _parse_int(row["age"].strip(), "age", where), bbox, source, label)
        )
    return Manifest(records, root, meta)


def read_manifest(path) -> Manifest:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise AgeNetIOError(f"cannot read manifest {path}: {exc.strerror}") from None
    return parse_manifest(text, os.path.dirname(os.path.abspath(path)))


def format_manifest(manifest: Manifest, out_dir=None, meta=None) -> str:
    """Render as CSV. Paths are rewritten relative to ``out_dir`` when given."""
    buf = io.StringIO()
    for k, v in {**manifest.meta, **(meta or {})}.items():
        buf.write(f"# {k}={v}\n")
    with_class = any(r.label is not None for r in manifest.records)
    cols = COLUMNS + (["class"] if with_class else [])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in manifest.records:
        path = r.path
        if out_dir is not None:
            path = os.path.relpath(manifest.resolve(r), os.path.abspath(out_dir)).replace(os.sep, "/")
        box = list(r.bbox) if r.bbox else ["", "", "", ""]
        row = [path, r.age, *box, r.source]
        if with_class:
            row.append("" if r.label is None else r.label)
        w.writerow(row)
    return buf.getvalue()


def write_manifest(manifest: Manifest, path, meta=None) -> None:
    out_dir = os.path.dirname(os.path.abspath(path))
    write_text(path, format_manifest(manifest, out_dir, meta))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def split(manifest: Manifest, train_frac: float = 0.8, seed: int = 42):
    """Seeded shuffle, then the first ``floor(train_frac * n)`` go to training."""
    n = len(manifest)
    if n == 0:
        raise ValidationError("cannot split an empty manifest")
    if not 0.0 <= train_frac <= 1.0:
        raise ValidationError(f"train_frac must be in [0, 1], got {train_frac}")
    order = make_rng(seed).permutation(n)
    n_train = math.floor(train_frac * n + 1e-9)
    return manifest.subset(order[:n_train]), manifest.subset(order[n_train:])


def dataset_stats(manifest: Manifest, scheme: BinScheme = TRAINING_BINS) -> dict:
    """Count, mean age, population std and a per-bin histogram."""
    if len(manifest) == 0:
        raise ValidationError("cannot summarise an empty manifest")
    ages = manifest.ages().astype(np.float64)
    hist = np.zeros(len(scheme), dtype=np.int64)
    for a in manifest.ages():
        hist[scheme.assign(int(a))] += 1
    return {
        "count": int(ages.size),
        "mean": float(ages.mean()),
        "std": float(ages.std()),
        "histogram": hist.tolist(),
    }


def stats_by_source(manifest: Manifest, scheme: BinScheme = TRAINING_BINS) -> dict:
    out = {"Aggregated": dataset_stats(manifest, scheme)}
    for src in SOURCES:
        idx = [i for i, r in enumerate(manifest.records) if r.source == src]
        if idx:
            out[src] = dataset_stats(manifest.subset(idx), scheme)
    return out


def adjacent_mass(probs, labels) -> np.ndarray:
    """Probability on the labelled bin plus its immediate neighbours."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n, k = probs.shape
    if labels.shape != (n,):
        raise ValidationError(f"{labels.shape[0]} labels for {n} probability rows")
    if n and (labels.min() < 0 or labels.max() >= k):
        raise ValidationError(f"label out of range 0..{k - 1}")
    rows = np.arange(n)
    mass = probs[rows, labels].copy()
    lo = labels - 1
    hi = labels + 1
    mass += np.where(lo >= 0, probs[rows, np.maximum(lo, 0)], 0.0)
    mass += np.where(hi < k, probs[rows, np.minimum(hi, k - 1)], 0.0)
    return mass


def filter_mislabelled(probs, labels, scheme: BinScheme | None = None, threshold: float = 0.40) -> np.ndarray:
    """Boolean keep-mask: drop rows whose adjacent mass is below ``threshold``."""
    if scheme is not None and np.shape(probs)[1] != len(scheme):
        raise ValidationError(f"{np.shape(probs)[1]} classes but the scheme has {len(scheme)} bins")
    return adjacent_mass(probs, labels) >= threshold


def load_images(manifest: Manifest, shape=None, dtype=np.float32) -> np.ndarray:
    """Stack manifest images into an ``N x C x H x W`` array scaled to [0, 1]."""
    imgs = []
    for r in manifest.records:
        path = manifest.resolve(r)
        try:
            img = read_ppm(path)
        except AgeNetIOError:
            raise
        except OSError as exc:
            raise AgeNetIOError(f"cannot read image {path}: {exc.strerror}") from None
        if shape is not None and img.shape != tuple(shape):
            raise ValidationError(f"{path}: image is {img.shape}, network expects {tuple(shape)}")
        imgs.append(img)
    if not imgs:
        c, h, w = shape if shape is not None else (3, 1, 1)
        return np.zeros((0, c, h, w), dtype=dtype)
    return (np.stack(imgs).astype(np.float64) / 255.0).astype(dtype)


def with_labels(manifest: Manifest, scheme: BinScheme = TRAINING_BINS) -> Manifest:
    recs = [replace(r, label=scheme.assign(r.age)) for r in manifest.records]
    return Manifest(recs, manifest.root, manifest.meta)
