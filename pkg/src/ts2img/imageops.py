"""Integer-factor average pooling and visualisation helpers."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class PoolSpec:
    factor_rows: int = 8
    factor_cols: int = 8
    mode: str = "average"

    def __post_init__(self):
        if self.factor_rows <= 0 or self.factor_cols <= 0:
            raise ValueError("pooling factors must be positive")
        if self.mode != "average":
            raise ValueError(f"unsupported pooling mode {self.mode!r}")


def average_pool(image, spec: PoolSpec = PoolSpec()) -> np.ndarray:
    """Mean over non-overlapping ``factor_rows x factor_cols`` blocks.

    Works on a single 2-D image or a stack ``(..., rows, cols)``.
    """
    img = np.asarray(image, dtype=np.float64)
    r, c = img.shape[-2:]
    fr, fc = spec.factor_rows, spec.factor_cols
    if r % fr or c % fc:
        raise ValueError(f"image of shape {(r, c)} is not divisible by {(fr, fc)}")
    blocks = img.reshape(img.shape[:-2] + (r // fr, fr, c // fc, fc))
    return blocks.mean(axis=(-3, -1))


def minmax_stretch(image) -> np.ndarray:
    """Affine map of ``[min, max]`` onto ``[0, 1]``; constant images become 0.5."""
    img = np.asarray(image, dtype=np.float64)
    lo, hi = img.min(), img.max()
    if hi == lo:
        return np.full_like(img, 0.5)
    return (img - lo) / (hi - lo)


def to_uint8(image) -> np.ndarray:
    return np.round(minmax_stretch(image) * 255).astype(np.uint8)


def png_name(series_id, slice_index: int, encoder: str) -> str:
    return f"{series_id}_{slice_index}_{encoder}.png"


def write_png(path, image) -> Path:
    """Write an 8-bit grayscale PNG of the min-max stretched image."""
    from PIL import Image

    path = Path(path)
    Image.fromarray(to_uint8(image)).save(path)
    return path
