"""Categorical cross-entropy on softmax outputs."""
from __future__ import annotations

import numpy as np

from .errors import DimensionError, ValidationError

PROB_EPS = 1e-12


def one_hot(labels, k: int, dtype=np.float64) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise DimensionError(f"labels must be a vector, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValidationError(f"label out of range 0..{k - 1}")
    y = np.zeros((labels.size, k), dtype=dtype)
    y[np.arange(labels.size), labels] = 1
    return y


def check_one_hot(y: np.ndarray) -> None:
    if y.ndim != 2:
        raise DimensionError(f"labels must be n x k, got {y.shape}")
    ok = np.all((y == 0) | (y == 1), axis=1) & (y.sum(axis=1) == 1)
    if not ok.all():
        bad = int(np.flatnonzero(~ok)[0])
        raise ValidationError(f"label row {bad} is not one-hot: {y[bad].tolist()}")


def _check(probs, y):
    if probs.shape != y.shape:
        raise DimensionError(f"probabilities {probs.shape} vs labels {y.shape}")
    check_one_hot(y)


def predict_prob(probs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Probability the model assigns to the labelled class, per row."""
    _check(probs, y)
    return (probs * y).sum(axis=1)


def cross_entropy(probs: np.ndarray, y: np.ndarray, reduction: str = "mean"):
    """Return ``(loss, grad_logits)``.

    ``probs`` must be softmax outputs; the gradient is taken with respect to
    the logits that produced them, i.e. ``(p - y)`` scaled by the reduction
    (``/ n`` for ``"mean"``, unscaled for ``"sum"``).
    """
    _check(probs, y)
    n = probs.shape[0]
    logp = np.log(np.clip(probs, PROB_EPS, 1.0))
    total = float(-(y * logp).sum())
    grad = probs - y
    if reduction == "mean":
        return total / n, grad / n
    if reduction == "sum":
        return total, grad
    raise ValueError(f"unknown reduction {reduction!r}")
