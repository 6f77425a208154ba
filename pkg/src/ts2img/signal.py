"""Raw signal containers, slicing and training-set scaling bounds."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

#: half-width used to widen degenerate (constant) bounds
DEGENERATE_EPS = 1e-6


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    sample_rate_hz: float = 1024.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("a time series must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(v)):
            raise ValueError("time series contains non-finite values")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class SliceGrid:
    """Contiguous, non-overlapping windows of equal length, in temporal order."""

    slices: np.ndarray  # (count, slice_len)
    slice_len: int

    @property
    def count(self) -> int:
        return self.slices.shape[0]

    def concatenate(self) -> np.ndarray:
        return self.slices.reshape(-1)


@dataclass(frozen=True)
class ScalingBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError(f"lower bound {self.lower} must be < upper bound {self.upper}")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @classmethod
    def from_values(cls, x, margin: float = 1.0) -> "ScalingBounds":
        """Bounds ``(margin*min, margin*max)``, widened when degenerate."""
        x = np.asarray(x, dtype=np.float64)
        lo, hi = margin * float(x.min()), margin * float(x.max())
        if hi - lo <= 0:
            mid = 0.5 * (lo + hi)
            lo, hi = mid - DEGENERATE_EPS, mid + DEGENERATE_EPS
        return cls(lo, hi)


def _as_array(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    return np.asarray(series, dtype=np.float64)


def slice_series(series, slice_len: int) -> SliceGrid:
    """Split a series into ``len // slice_len`` windows; the tail remainder is dropped."""
    x = _as_array(series)
    if slice_len <= 0:
        raise ValueError("slice_len must be positive")
    if x.size < slice_len:
        raise ValueError(
            f"series of length {x.size} is shorter than slice_len={slice_len}"
        )
    count = x.size // slice_len
    return SliceGrid(x[: count * slice_len].reshape(count, slice_len).copy(), slice_len)


def fit_bounds(training: Iterable, margin: float = 1.2) -> ScalingBounds:
    """Scale the global min/max of the training data by ``margin``.

    With the default margin of 1.2 a test value must exceed the training
    extremes by 20% before it is clipped.
    """
    if margin < 1:
        raise ValueError("margin must be >= 1")
    lo, hi = np.inf, -np.inf
    n = 0
    for s in training:
        x = _as_array(s)
        if x.size == 0:
            continue
        lo = min(lo, float(x.min()))
        hi = max(hi, float(x.max()))
        n += 1
    if n == 0:
        raise ValueError("cannot fit bounds on an empty training collection")
    return ScalingBounds.from_values(np.array([lo, hi]), margin)


def clip_to_bounds(x, bounds: ScalingBounds) -> np.ndarray:
    return np.clip(np.asarray(x, dtype=np.float64), bounds.lower, bounds.upper)


# ---------------------------------------------------------------------------
# ingestion

def read_csv_series(path) -> np.ndarray:
    """One series per row, comma separated. All rows must share one length."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise ValueError(f"{path}: no series found")
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ValueError(f"{path}: rows have differing lengths {sorted(lengths)}")
    return np.array(rows, dtype=np.float64)


def write_csv_series(path, data: np.ndarray) -> None:
    with open(path, "w") as fh:
        for row in np.atleast_2d(data):
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def _sidecar(path: Path) -> Path:
    return path.with_suffix(path.suffix + ".json")


def read_binary_series(path) -> np.ndarray:
    """Little-endian float32 samples; shape read from ``<path>.json``."""
    path = Path(path)
    desc = json.loads(_sidecar(path).read_text())
    count, length = int(desc["count"]), int(desc["length"])
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != count * length:
        raise ValueError(
            f"{path}: expected {count}x{length} samples, found {raw.size}"
        )
    return raw.reshape(count, length).astype(np.float64)


def write_binary_series(path, data: np.ndarray) -> None:
    path = Path(path)
    data = np.atleast_2d(np.asarray(data))
    data.astype("<f4").tofile(path)
    _sidecar(path).write_text(
        json.dumps({"count": data.shape[0], "length": data.shape[1], "dtype": "<f4"})
    )


def load_series(path, fmt: str | None = None) -> np.ndarray:
    """Load a dataset as a ``(count, length)`` array. ``fmt`` is ``csv`` or ``bin``."""
    path = Path(path)
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "bin"
    if fmt == "csv":
        return read_csv_series(path)
    if fmt == "bin":
        return read_binary_series(path)
    raise ValueError(f"unknown series format {fmt!r}")
