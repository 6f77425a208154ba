"""Reconstruction residuals, percentile threshold and per-series decisions."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def residual(original, reconstruction) -> float:
    """l1 norm of the reconstruction error of one slice (raw or encoded)."""
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(reconstruction, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum())


def residuals(original, reconstruction) -> np.ndarray:
    """Per-item l1 residuals over the leading axis."""
    a = np.asarray(original, dtype=np.float64)
    b = np.asarray(reconstruction, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.abs(a - b).reshape(len(a), -1).sum(axis=1)


@dataclass(frozen=True)
class Threshold:
    value: float
    percentile: float = 99.0
    calibration_count: int = 0


def calibrate(records, percentile: float = 99.0) -> Threshold:
    """Empirical percentile of healthy slice residuals, linear interpolation between ranks."""
    r = np.asarray(records, dtype=np.float64).ravel()
    if r.size == 0:
        raise ValueError("cannot calibrate a threshold without residuals")
    if not 0 < percentile <= 100:
        raise ValueError("percentile must lie in (0, 100]")
    return Threshold(float(np.percentile(r, percentile, method="linear")), percentile, r.size)


@dataclass(frozen=True)
class SeriesScore:
    series_id: str
    max_residual: float
    threshold: float
    anomalous: bool
    slice_residuals: np.ndarray = field(default=None, repr=False, compare=False)


def score_series(slice_residuals, threshold: Threshold | float, series_id="0") -> SeriesScore:
    """Flag a series when its largest slice residual strictly exceeds the threshold."""
    r = np.asarray(slice_residuals, dtype=np.float64)
    if r.size == 0:
        raise ValueError("a series needs at least one slice residual")
    tau = threshold.value if isinstance(threshold, Threshold) else float(threshold)
    peak = float(r.max())
    return SeriesScore(str(series_id), peak, tau, peak > tau, r)


@dataclass
class DetectionReport:
    scores: list[SeriesScore]
    threshold: Threshold

    @property
    def max_residuals(self) -> np.ndarray:
        return np.array([s.max_residual for s in self.scores])

    @property
    def decisions(self) -> np.ndarray:
        return np.array([s.anomalous for s in self.scores], dtype=bool)

    @property
    def ids(self) -> list[str]:
        return [s.series_id for s in self.scores]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["series_id", "max_residual", "threshold", "decision"])
            for s in self.scores:
                w.writerow([s.series_id, repr(s.max_residual), repr(s.threshold), int(s.anomalous)])
        return path

    @classmethod
    def from_csv(cls, path, percentile: float = 99.0) -> "DetectionReport":
        scores = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                peak, tau = float(row["max_residual"]), float(row["threshold"])
                scores.append(SeriesScore(row["series_id"], peak, tau, bool(int(row["decision"]))))
        tau = scores[0].threshold if scores else float("nan")
        return cls(scores, Threshold(tau, percentile))


def detect(slice_residuals_per_series, threshold: Threshold, ids=None) -> DetectionReport:
    ids = ids if ids is not None else [str(i) for i in range(len(slice_residuals_per_series))]
    return DetectionReport(
        [score_series(r, threshold, i) for i, r in zip(ids, slice_residuals_per_series)],
        threshold,
    )
