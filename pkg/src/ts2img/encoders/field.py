"""Field-type encoders: GAF, MTF (uniform or SAX bins), recurrence plot, grey scale.

Every encoder maps one slice of ``N`` samples to a matrix. GAF, MTF and RP
return ``N x N``; average pooling to the target image size is done by the
caller (see :mod:`ts2img.encoders`). GS produces ``K x K`` directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import norm

from ..signal import ScalingBounds, clip_to_bounds

GS_VARIANTS = ("original", "P255", "P1", "minmax")


# ---------------------------------------------------------------------------
# Gramian Angular Field

def gaf_normalize(x, bounds: ScalingBounds) -> np.ndarray:
    """Rescale into ``[-1, 1]``: ``((x - UB) + (x - LB)) / (UB - LB)``."""
    x = np.asarray(x, dtype=np.float64)
    z = ((x - bounds.upper) + (x - bounds.lower)) / (bounds.upper - bounds.lower)
    # guards against 1 + 1ulp from rounding; inputs are already inside the bounds
    return np.clip(z, -1.0, 1.0)


def gaf_encode(slice_, bounds: ScalingBounds | None = None, variant: str = "modified"):
    """Gramian Angular (summation) Field, ``cos(phi_i + phi_j)``.

    The ``original`` variant rescales each slice by its own min/max. The
    ``modified`` variant uses bounds fitted on the training set and clips
    values that fall outside them.

    The angle sum is evaluated as ``x_i x_j - sqrt(1 - x_i^2) sqrt(1 - x_j^2)``
    which is exact at the boundary values -1, 0 and 1.
    """
    x = np.asarray(slice_, dtype=np.float64)
    if variant == "original":
        bounds = ScalingBounds.from_values(x)
    elif variant == "modified":
        if bounds is None:
            raise ValueError("modified GAF needs bounds fitted on the training set")
        x = clip_to_bounds(x, bounds)
    else:
        raise ValueError(f"unknown GAF variant {variant!r}")
    z = gaf_normalize(x, bounds)
    s = np.sqrt(1.0 - z * z)
    return np.outer(z, z) - np.outer(s, s)


# ---------------------------------------------------------------------------
# Markov Transition Field

@dataclass(frozen=True)
class SaxQuantizer:
    """Gaussian-breakpoint bin assignment fitted on training statistics."""

    bin_count: int
    breakpoints: np.ndarray
    train_mean: float
    train_std: float

    def assign(self, x) -> np.ndarray:
        """0-based bin index; values beyond the outer breakpoints land in the end bins."""
        return np.searchsorted(self.breakpoints, np.asarray(x, dtype=np.float64), side="right")

    def inverse(self, bins) -> np.ndarray:
        """Bin centres (Gaussian conditional medians) in signal units."""
        q = (np.asarray(bins) + 0.5) / self.bin_count
        return self.train_mean + self.train_std * norm.ppf(q)


@dataclass(frozen=True)
class UniformBins:
    """Equal-width bins over ``[lower, upper]``."""

    bin_count: int
    lower: float
    upper: float

    @classmethod
    def fit(cls, x, bin_count: int) -> "UniformBins":
        x = np.asarray(x, dtype=np.float64)
        return cls(bin_count, float(x.min()), float(x.max()))

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.bin_count + 1)[1:-1]

    def assign(self, x) -> np.ndarray:
        if self.upper == self.lower:
            return np.zeros(np.shape(x), dtype=np.intp)
        return np.searchsorted(self.edges, np.asarray(x, dtype=np.float64), side="right")


def sax_fit(training, bin_count: int = 500) -> SaxQuantizer:
    if bin_count < 2:
        raise ValueError("SAX needs at least 2 bins")
    if isinstance(training, np.ndarray):
        x = training.reshape(-1).astype(np.float64)
    else:
        x = np.concatenate([np.ravel(np.asarray(t, dtype=np.float64)) for t in training])
    mean = float(x.mean())
    std = float(x.std())
    if not std > 0:
        raise ValueError("cannot fit SAX breakpoints on zero-variance training data")
    levels = np.arange(1, bin_count) / bin_count
    breakpoints = mean + std * norm.ppf(levels)
    if np.any(np.diff(breakpoints) <= 0):
        raise ValueError("SAX breakpoints are not strictly increasing; too many bins")
    return SaxQuantizer(bin_count, breakpoints, mean, std)


@dataclass(frozen=True)
class MarkovTransitionMatrix:
    probs: np.ndarray  # (Q, Q), rows sum to 1 where the bin was left at least once

    @property
    def bin_count(self) -> int:
        return self.probs.shape[0]


def transition_counts(sequences: Iterable, quantizer) -> np.ndarray:
    q = quantizer.bin_count
    counts = np.zeros(q * q, dtype=np.int64)
    for seq in sequences:
        b = quantizer.assign(np.ravel(seq))
        if b.size < 2:
            continue
        counts += np.bincount(b[:-1] * q + b[1:], minlength=q * q)
    return counts.reshape(q, q)


def mtf_fit(training: Iterable, quantizer) -> MarkovTransitionMatrix:
    """Row-normalised transition counts over consecutive points of each sequence.

    Transitions are never counted across sequence boundaries. Bins that are
    never left keep an all-zero row.
    """
    if isinstance(training, np.ndarray) and training.ndim == 1:
        training = [training]
    counts = transition_counts(training, quantizer)
    total = counts.sum()
    if total == 0:
        raise ValueError("no transitions observed in the training data")
    rows = counts.sum(axis=1, keepdims=True)
    probs = np.divide(counts, rows, out=np.zeros(counts.shape), where=rows > 0)
    return MarkovTransitionMatrix(probs)


def mtf_encode(slice_, quantizer, W: MarkovTransitionMatrix) -> np.ndarray:
    b = quantizer.assign(np.asarray(slice_, dtype=np.float64))
    return W.probs[b[:, None], b[None, :]]


def mtf_encode_original(slice_, bin_count: int) -> np.ndarray:
    """Per-slice uniform bins and a per-slice transition matrix."""
    quantizer = UniformBins.fit(slice_, bin_count)
    return mtf_encode(slice_, quantizer, mtf_fit([slice_], quantizer))


# ---------------------------------------------------------------------------
# Recurrence plot

def rp_encode(slice_, variant: str = "modified") -> np.ndarray:
    """Unthresholded recurrence plot with unit-length sub-sequences.

    The modified variant adds the slice mean so the absolute level survives.
    """
    x = np.asarray(slice_, dtype=np.float64)
    rp = np.abs(x[:, None] - x[None, :])
    if variant == "original":
        return rp
    if variant == "modified":
        return rp + x.mean()
    raise ValueError(f"unknown RP variant {variant!r}")


# ---------------------------------------------------------------------------
# Grey scale

def round_half_away(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def gs_window(slice_len: int, size: int, stride: int) -> tuple[int, int]:
    """``(start, used)``: the offset of the first kept sample and the number kept."""
    used = (size - 1) * stride + size
    if used > slice_len:
        raise ValueError(
            f"size={size}, stride={stride} needs {used} samples, slice has {slice_len}"
        )
    return (slice_len - used) // 2, used


def gs_encode(slice_, bounds: ScalingBounds | None = None, variant: str = "P1",
              size: int = 64, stride: int = 7, slice_len: int = 512) -> np.ndarray:
    """Stack ``size`` overlapping windows (start offset ``i * stride``) as image rows.

    With the defaults 505 of the 512 samples are used; 3 leading and 4
    trailing samples are discarded. ``variant`` selects the value scaling:

    ``original``  per-slice min/max, ``P = 255``, rounded
    ``P255``      training bounds, ``P = 255``, rounded
    ``P1``        training bounds, ``P = 1``, rounded
    ``minmax``    training bounds, no rounding
    """
    x = np.asarray(slice_, dtype=np.float64)
    if x.size != slice_len:
        raise ValueError(f"GS expects slices of length {slice_len}, got {x.size}")
    start, _ = gs_window(slice_len, size, stride)
    if variant == "original":
        bounds, scale, rounded = ScalingBounds.from_values(x), 255.0, True
    elif variant in ("P255", "P1", "minmax"):
        if bounds is None:
            raise ValueError(f"GS variant {variant} needs training bounds")
        scale = 255.0 if variant == "P255" else 1.0
        rounded = variant != "minmax"
    else:
        raise ValueError(f"unknown GS variant {variant!r}")
    idx = start + stride * np.arange(size)[:, None] + np.arange(size)[None, :]
    img = scale * (x[idx] - bounds.lower) / (bounds.upper - bounds.lower)
    return round_half_away(img) if rounded else img
