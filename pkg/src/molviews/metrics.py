"""ROC-AUC and RMSE, shared by the training loss and evaluation."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import rankdata


class SingleClass(ValueError):
    pass


class EmptyBatch(ValueError):
    pass


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC; tied positive/negative pairs earn half credit."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels).ravel()
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = int((labels == 0).sum())
    if n_pos + n_neg != labels.size:
        raise ValueError("labels must be 0 or 1")
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("ROC-AUC needs both classes")
    ranks = rankdata(scores, method="average")
    # rank sums are multiples of 0.5, exact in float64 for any realistic size
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def rmse(predictions, targets) -> float:
    """Root mean squared error over all entries."""
    p = np.asarray(predictions, dtype=np.float64).ravel()
    t = np.asarray(targets, dtype=np.float64).ravel()
    if p.shape != t.shape:
        raise ValueError("predictions and targets differ in length")
    if p.size == 0:
        raise EmptyBatch("RMSE of an empty batch")
    return math.sqrt(float(np.mean((t - p) ** 2)))
