"""Encoder registry: turn whole series into stacks of slice images.

Each encoder is fitted on the healthy training series (a no-op for the
per-slice "original" variants and for SP/SC), then maps one series of
shape ``(length,)`` to an array of images ``(n_slices, 64, 64)``. The
``none`` encoder returns the raw slices ``(n_slices, slice_len)`` for the
1-D baseline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..imageops import PoolSpec, average_pool
from ..signal import ScalingBounds, fit_bounds, slice_series
from .field import (
    MarkovTransitionMatrix,
    SaxQuantizer,
    UniformBins,
    gaf_encode,
    gs_encode,
    mtf_encode,
    mtf_encode_original,
    mtf_fit,
    rp_encode,
    sax_fit,
)
from .spectral import CwtConfig, Scalogram, StftConfig, cwt_scalogram, ricker, stft_spectrogram

ENCODERS = (
    "none",
    "gaf-original", "gaf-modified",
    "mtf-original", "mtf-modified",
    "rp-original", "rp-modified",
    "gs-original", "gs-p255", "gs-p1", "gs-minmax",
    "sp", "sc",
)


@dataclass
class EncoderSettings:
    slice_len: int = 512
    image_size: int = 64
    margin: float = 1.2
    sax_bins: int = 500
    gs_stride: int = 7
    stft_window: int = 126
    stft_hop: int = 8
    cwt_support: float = 10.0


class Encoder:
    """Fitted series-to-images transform."""

    def __init__(self, name: str, settings: EncoderSettings | None = None):
        if name not in ENCODERS:
            raise ValueError(f"unknown encoder {name!r}; choose from {', '.join(ENCODERS)}")
        self.name = name
        self.settings = settings or EncoderSettings()
        self.bounds: ScalingBounds | None = None
        self.quantizer: SaxQuantizer | None = None
        self.transitions: MarkovTransitionMatrix | None = None
        self._scalogram: Scalogram | None = None

    @property
    def family(self) -> str:
        return self.name.split("-")[0]

    @property
    def variant(self) -> str | None:
        return self.name.split("-", 1)[1] if "-" in self.name else None

    @property
    def is_raw(self) -> bool:
        return self.name == "none"

    @property
    def needs_fit(self) -> bool:
        return self.name in ("gaf-modified", "mtf-modified", "gs-p255", "gs-p1", "gs-minmax")

    @property
    def pool_factor(self) -> int:
        return self.settings.slice_len // self.settings.image_size

    def fit(self, training) -> "Encoder":
        s = self.settings
        if self.name in ("gaf-modified", "gs-p255", "gs-p1", "gs-minmax"):
            self.bounds = fit_bounds(training, s.margin)
        elif self.name == "mtf-modified":
            self.quantizer = sax_fit(training, s.sax_bins)
            self.transitions = mtf_fit(training, self.quantizer)
        return self

    def _check_fitted(self):
        if self.needs_fit and self.bounds is None and self.transitions is None:
            raise RuntimeError(f"encoder {self.name} must be fitted on training data first")

    def encode_slice(self, x) -> np.ndarray:
        """Encode one slice of ``slice_len`` samples (not used by SP, which needs the series)."""
        self._check_fitted()
        s = self.settings
        fam, var = self.family, self.variant
        if fam == "none":
            return np.asarray(x, dtype=np.float64)
        if fam == "gs":
            variant = {"original": "original", "p255": "P255", "p1": "P1", "minmax": "minmax"}[var]
            return gs_encode(x, self.bounds, variant, size=s.image_size,
                             stride=s.gs_stride, slice_len=s.slice_len)
        if fam == "sc":
            if self._scalogram is None:
                self._scalogram = Scalogram(s.slice_len, self._cwt_config())
            return self._scalogram(x)[0]
        if fam == "gaf":
            full = gaf_encode(x, self.bounds, var)
        elif fam == "mtf":
            if var == "original":
                full = mtf_encode_original(x, s.sax_bins)
            else:
                full = mtf_encode(x, self.quantizer, self.transitions)
        elif fam == "rp":
            full = rp_encode(x, var)
        else:
            raise ValueError(f"encoder {self.name} works on whole series")
        f = self.pool_factor
        return average_pool(full, PoolSpec(f, f))

    def _cwt_config(self) -> CwtConfig:
        return CwtConfig(support=self.settings.cwt_support, pool=self.pool_factor)

    def _stft_config(self) -> StftConfig:
        return StftConfig(window_len=self.settings.stft_window, hop=self.settings.stft_hop)

    def encode(self, series) -> np.ndarray:
        """All slice images of one series, in temporal order."""
        self._check_fitted()
        s = self.settings
        x = np.asarray(getattr(series, "values", series), dtype=np.float64)
        if self.family == "sp":
            cfg = self._stft_config()
            return stft_spectrogram(x, cfg, frames_per_image=s.slice_len // cfg.hop)
        grid = slice_series(x, s.slice_len)
        if self.family == "sc":
            if self._scalogram is None:
                self._scalogram = Scalogram(s.slice_len, self._cwt_config())
            return self._scalogram(grid.slices)
        if self.family == "none":
            return grid.slices
        return np.stack([self.encode_slice(sl) for sl in grid.slices])

    def encode_many(self, data, workers: int = 1) -> np.ndarray:
        """Encode a ``(count, length)`` dataset to ``(count, n_slices, ...)``."""
        data = np.atleast_2d(np.asarray(data, dtype=np.float64))
        if workers > 1 and len(data) > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(workers) as pool:
                return np.stack(list(pool.map(self.encode, data)))
        return np.stack([self.encode(row) for row in data])

    # -- persistence ---------------------------------------------------------

    def state(self) -> dict[str, np.ndarray]:
        out = {}
        if self.bounds is not None:
            out["bounds"] = np.array([self.bounds.lower, self.bounds.upper])
        if self.quantizer is not None:
            q = self.quantizer
            out["sax_breakpoints"] = q.breakpoints
            out["sax_stats"] = np.array([q.bin_count, q.train_mean, q.train_std], dtype=np.float64)
        if self.transitions is not None:
            out["mtf_probs"] = self.transitions.probs
        return out

    def load_state(self, state: dict[str, np.ndarray]) -> "Encoder":
        if "bounds" in state:
            lo, hi = state["bounds"]
            self.bounds = ScalingBounds(float(lo), float(hi))
        if "sax_breakpoints" in state:
            q, mean, std = state["sax_stats"]
            self.quantizer = SaxQuantizer(int(q), np.asarray(state["sax_breakpoints"]),
                                          float(mean), float(std))
        if "mtf_probs" in state:
            self.transitions = MarkovTransitionMatrix(np.asarray(state["mtf_probs"]))
        return self


__all__ = [
    "ENCODERS", "Encoder", "EncoderSettings", "UniformBins",
    "gaf_encode", "gs_encode", "mtf_encode", "mtf_fit", "rp_encode", "sax_fit",
    "stft_spectrogram", "cwt_scalogram", "ricker",
]
