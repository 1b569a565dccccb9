"""Evaluation metrics: accuracy, confusion counts, ROC analysis.

roc_curve builds the staircase over the distinct score values with a
sentinel threshold above everything, so the curve always starts at
(0, 0) and ends at (1, 1); auc integrates it and eer finds the point
where false accepts and false rejects balance.
"""

import numpy as np


def accuracy(predicted, truth):
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError("prediction and truth lengths disagree")
    if len(truth) == 0:
        raise ValueError("no samples")
    return float((predicted == truth).mean())


def confusion_matrix(predicted, truth, n_classes=None):
    """Counts[i, j] = samples of true class i predicted as class j."""
    predicted = np.asarray(predicted).astype(int)
    truth = np.asarray(truth).astype(int)
    if n_classes is None:
        n_classes = int(max(predicted.max(), truth.max())) + 1
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (truth, predicted), 1)
    return counts


def roc_curve(scores, labels):
    """(fpr, tpr, thresholds) for binary labels, 1 meaning positive.

    One threshold per distinct score, descending, preceded by an +inf
    sentinel; a sample counts as accepted when its score >= threshold.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(int)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be matching vectors")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need both classes for a curve")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    tps = np.cumsum(labels[order])
    fps = np.cumsum(1 - labels[order])
    # keep the last index of every tie group: ties cross together
    keep = np.flatnonzero(np.diff(sorted_scores, append=-np.inf))
    tpr = np.concatenate([[0.0], tps[keep] / n_pos])
    fpr = np.concatenate([[0.0], fps[keep] / n_neg])
    thresholds = np.concatenate([[np.inf], sorted_scores[keep]])
    return fpr, tpr, thresholds


def auc(fpr, tpr):
    """Trapezoid area under the staircase."""
    return float(np.trapezoid(tpr, fpr))


def eer(fpr, tpr):
    """Rate where false accepts equal false rejects, interpolated.

    Walks the curve until the miss rate 1 - tpr drops below fpr and
    intersects the connecting segment.
    """
    fpr = np.asarray(fpr, dtype=np.float64)
    fnr = 1.0 - np.asarray(tpr, dtype=np.float64)
    diff = fpr - fnr  # monotone nondecreasing along the curve
    i = int(np.argmax(diff >= 0.0))
    if diff[i] == 0.0:
        return float(fpr[i])
    # segment between points i-1 and i brackets the crossing
    f0, f1 = fpr[i - 1], fpr[i]
    m0, m1 = fnr[i - 1], fnr[i]
    t = (m0 - f0) / ((f1 - f0) - (m1 - m0))
    return float(f0 + t * (f1 - f0))
