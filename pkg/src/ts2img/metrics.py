"""Confusion counts, rates, F1 and ROC/AUC for residual scores.

Positives are anomalous series; a series is predicted positive when its
score strictly exceeds the threshold.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    def __iter__(self):
        return iter((self.tp, self.fp, self.tn, self.fn))

    @property
    def tpr(self) -> float:
        if self.tp + self.fn == 0:
            raise ValueError("TPR undefined: no anomalous samples")
        return self.tp / (self.tp + self.fn)

    @property
    def fpr(self) -> float:
        if self.fp + self.tn == 0:
            raise ValueError("FPR undefined: no healthy samples")
        return self.fp / (self.fp + self.tn)

    @property
    def f1(self) -> float:
        return f1(self.tp, self.fp, self.fn)


def _validate(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).astype(int).ravel()
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    if s.size == 0:
        raise ValueError("no scored samples")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0 (healthy) or 1 (anomalous)")
    return s, y


def confusion(scores, labels, threshold: float) -> Confusion:
    s, y = _validate(scores, labels)
    pred = s > threshold
    pos = y == 1
    return Confusion(int(np.sum(pred & pos)), int(np.sum(pred & ~pos)),
                     int(np.sum(~pred & ~pos)), int(np.sum(~pred & pos)))


def f1(tp: int, fp: int, fn: int) -> float:
    """``2 TP / (2 TP + FP + FN)``; NaN when the denominator is zero."""
    denom = 2 * tp + fp + fn
    if denom == 0:
        return float("nan")
    return 2 * tp / denom


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # +inf first, then distinct scores in decreasing order
    auc: float

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["threshold", "fpr", "tpr"])
            for t, x, y in zip(self.thresholds, self.fpr, self.tpr):
                w.writerow([repr(float(t)), repr(float(x)), repr(float(y))])
        return path


def roc_auc(scores, labels) -> RocCurve:
    """ROC swept over distinct scores (ties form one step), AUC by trapezoids.

    The point for score ``t`` counts samples with score ``>= t`` as positive,
    so the curve runs from (0, 0) to (1, 1).
    """
    s, y = _validate(scores, labels)
    n_pos, n_neg = int(y.sum()), int((1 - y).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both healthy and anomalous samples")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    # last index of each group of equal scores
    ends = np.r_[np.nonzero(np.diff(s))[0], s.size - 1]
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1])) / 2.0)
    return RocCurve(fpr, tpr, np.r_[np.inf, s[ends]], auc)


def pairwise_auc(scores, labels) -> float:
    """P(score_anomalous > score_healthy) + 0.5 P(tie), over all pairs."""
    s, y = _validate(scores, labels)
    a, h = s[y == 1], s[y == 0]
    if a.size == 0 or h.size == 0:
        raise ValueError("AUC needs both healthy and anomalous samples")
    diff = a[:, None] - h[None, :]
    return float((np.sum(diff > 0) + 0.5 * np.sum(diff == 0)) / diff.size)


def summary(scores, labels, threshold: float) -> dict:
    c = confusion(scores, labels, threshold)
    return {"tpr": c.tpr, "fpr": c.fpr, "f1": c.f1, "auc": roc_auc(scores, labels).auc,
            "tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn, "threshold": float(threshold)}


def write_summary(path, metrics: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")
    return path
