"""Accuracy, confusion matrices and the cross-scheme (hierarchical) evaluation.

The hierarchical path turns a softmax row into a numeric age by weighting
each training bin's representative age, then judges that age against a
different bin scheme (e.g. Adience) for exact and one-off accuracy.
"""
from __future__ import annotations

import numpy as np

from .data.bins import BinScheme
from .errors import DimensionError, ValidationError

DEFAULT_OPEN_AGE = 70.0


class MidpointTable:
    """Representative age per bin: ``(lo + hi) / 2``; the open bin gets ``open_age``."""

    def __init__(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("midpoint table must be a non-empty vector")
        if np.any(np.diff(values) <= 0):
            raise ValidationError(f"midpoints must be strictly increasing: {values.tolist()}")
        self.values = values

    @classmethod
    def from_scheme(cls, scheme: BinScheme, open_age: float = DEFAULT_OPEN_AGE):
        vals = []
        for b in scheme:
            if b.hi is None:
                if open_age < b.lo:
                    raise ValidationError(f"open-bin age {open_age} is below its bin start {b.lo}")
                vals.append(float(open_age))
            else:
                vals.append((b.lo + b.hi) / 2.0)
        return cls(vals)

    def __len__(self):
        return self.values.size


def confusion_matrix(preds, labels, k: int) -> np.ndarray:
    """Rows are ground truth, columns are predictions."""
    preds = np.asarray(preds, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if preds.shape != labels.shape:
        raise DimensionError(f"{preds.size} predictions vs {labels.size} labels")
    for name, arr in (("prediction", preds), ("label", labels)):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ValidationError(f"{name} outside 0..{k - 1}")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (labels, preds), 1)
    return cm


def evaluate(probs, labels):
    """Categorical accuracy and confusion matrix of argmax predictions."""
    probs = np.asarray(probs)
    labels = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] != labels.shape[0]:
        raise DimensionError(f"probabilities {probs.shape} vs {labels.shape[0]} labels")
    if probs.shape[0] == 0:
        raise ValidationError("nothing to evaluate")
    preds = np.argmax(probs, axis=1)
    cm = confusion_matrix(preds, labels, probs.shape[1])
    return float(np.trace(cm) / cm.sum()), cm


def expected_age(probs, table: MidpointTable) -> np.ndarray:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != len(table):
        raise DimensionError(f"probabilities {probs.shape} vs {len(table)} midpoints")
    return probs @ table.values


def _in_bin(ages, b):
    hit = ages >= b.lo
    if b.hi is not None:
        hit &= ages <= b.hi
    return hit


def cross_bin_eval(pred_ages, labels, target: BinScheme) -> dict:
    """Exact and one-off hit rates of numeric ages against ``target`` bins.

    One-off also accepts the list-adjacent bins ``j - 1`` and ``j + 1``;
    ages in gaps between bins miss on both counts.
    """
    ages = np.asarray(pred_ages, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if ages.shape != labels.shape or ages.ndim != 1:
        raise DimensionError(f"{ages.shape} ages vs {labels.shape} labels")
    k = len(target)
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValidationError(f"label outside 0..{k - 1} for the {target.name or 'target'} scheme")
    if labels.size == 0:
        raise ValidationError("nothing to evaluate")
    member = np.stack([_in_bin(ages, b) for b in target], axis=1)
    rows = np.arange(labels.size)
    exact = member[rows, labels]
    left = np.where(labels > 0, member[rows, np.maximum(labels - 1, 0)], False)
    right = np.where(labels < k - 1, member[rows, np.minimum(labels + 1, k - 1)], False)
    one_off = exact | left | right
    return {
        "n": int(labels.size),
        "exact": float(exact.mean()),
        "one_off": float(one_off.mean()),
    }
