from .bins import ADIENCE_BINS, TRAINING_BINS, AgeBin, BinScheme, assign_bin, get_scheme
from .manifest import (
    Manifest,
    SampleRecord,
    dataset_stats,
    filter_mislabelled,
    load_images,
    read_manifest,
    split,
    write_manifest,
)
from .transforms import AugmentConfig, augment, crop_with_margin, resize_bilinear

__all__ = [
    "ADIENCE_BINS",
    "TRAINING_BINS",
    "AgeBin",
    "AugmentConfig",
    "BinScheme",
    "Manifest",
    "SampleRecord",
    "assign_bin",
    "augment",
    "crop_with_margin",
    "dataset_stats",
    "filter_mislabelled",
    "get_scheme",
    "load_images",
    "read_manifest",
    "resize_bilinear",
    "split",
    "write_manifest",
]
