"""Spectrogram (magnitude STFT) and Ricker-wavelet scalogram encoders."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import get_window

from ..imageops import PoolSpec, average_pool


@dataclass(frozen=True)
class StftConfig:
    window_len: int = 126
    hop: int = 8
    window: str = "hann"
    magnitude: str = "abs"  # "abs" or "power"

    def __post_init__(self):
        if self.hop <= 0 or self.window_len <= 0:
            raise ValueError("window_len and hop must be positive")

    @property
    def freq_bins(self) -> int:
        return self.window_len // 2 + 1

    def taper(self) -> np.ndarray:
        return get_window(self.window, self.window_len, fftbins=True)


def stft_frames(x, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """Windowed frames ``(n_frames, window_len)``; frame ``t`` starts at ``t * hop``.

    ``len(x) // hop`` frames are produced; the tail is zero padded so the
    last frames are complete.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < cfg.window_len:
        raise ValueError(
            f"series of length {x.size} is shorter than one window ({cfg.window_len})"
        )
    n_frames = x.size // cfg.hop
    need = (n_frames - 1) * cfg.hop + cfg.window_len
    padded = np.concatenate([x, np.zeros(max(0, need - x.size))])
    frames = np.lib.stride_tricks.sliding_window_view(padded, cfg.window_len)[:: cfg.hop]
    return frames[:n_frames] * cfg.taper()


def stft_magnitude(x, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """``(freq_bins, n_frames)`` map of the unnormalised forward DFT magnitude."""
    spec = np.abs(np.fft.rfft(stft_frames(x, cfg), axis=1)).T
    return spec * spec if cfg.magnitude == "power" else spec


def stft_spectrogram(series, cfg: StftConfig = StftConfig(),
                     frames_per_image: int | None = None) -> np.ndarray:
    """Spectrogram of the whole series cut along time into square images.

    Returns ``(n_images, freq_bins, frames_per_image)``. By default an image
    spans ``freq_bins`` frames, so 61,440 samples give 120 images of 64x64.
    Frames beyond the last full image are dropped.
    """
    x = getattr(series, "values", series)
    spec = stft_magnitude(x, cfg)
    width = frames_per_image or cfg.freq_bins
    n = spec.shape[1] // width
    spec = spec[:, : n * width]
    return spec.reshape(cfg.freq_bins, n, width).transpose(1, 0, 2)


# ---------------------------------------------------------------------------
# Scalogram

def ricker(points: int, scale: float) -> np.ndarray:
    """Mexican-hat wavelet sampled at ``points`` integer offsets centred on 0."""
    if points <= 0:
        raise ValueError("points must be positive")
    if not scale > 0:
        raise ValueError("scale must be positive")
    a = float(scale)
    amp = 2.0 / (np.sqrt(3.0 * a) * np.pi ** 0.25)
    t = np.arange(points) - (points - 1) / 2.0
    r = (t / a) ** 2
    return amp * (1.0 - r) * np.exp(-r / 2.0)


def default_scales() -> np.ndarray:
    return 2.0 ** (np.arange(1, 65) / 4.0)


@dataclass(frozen=True)
class CwtConfig:
    scales: np.ndarray = field(default_factory=default_scales)
    support: float = 10.0  # kernel half-width in units of scale
    pool: int = 8

    def __post_init__(self):
        s = np.asarray(self.scales, dtype=np.float64)
        if s.ndim != 1 or s.size == 0 or np.any(s <= 0) or np.any(np.diff(s) <= 0):
            raise ValueError("scales must be positive and strictly increasing")
        object.__setattr__(self, "scales", s)

    def half_width(self, scale: float, slice_len: int) -> int:
        return int(min(np.ceil(self.support * scale), slice_len))

    def kernels(self, slice_len: int) -> list[np.ndarray]:
        return [ricker(2 * self.half_width(a, slice_len) + 1, a) for a in self.scales]


class Scalogram:
    """Batched Ricker convolution for a fixed slice length.

    Kernel spectra are computed once; each call convolves a stack of slices
    with every kernel through one FFT.
    """

    def __init__(self, slice_len: int = 512, cfg: CwtConfig | None = None):
        self.cfg = cfg or CwtConfig()
        self.slice_len = slice_len
        kernels = self.cfg.kernels(slice_len)
        self.half = np.array([(k.size - 1) // 2 for k in kernels])
        longest = max(k.size for k in kernels)
        self.nfft = 1 << int(np.ceil(np.log2(slice_len + longest - 1)))
        spectra = []
        for k, h in zip(kernels, self.half):
            # centre the kernel at index 0 (circularly) so 'same' output starts at 0
            buf = np.zeros(self.nfft)
            buf[: h + 1] = k[h:]
            buf[self.nfft - h:] = k[:h]
            spectra.append(np.fft.rfft(buf))
        self.spectra = np.array(spectra)

    def response(self, slices) -> np.ndarray:
        """``(n, n_scales, slice_len)`` same-length convolution responses."""
        x = np.atleast_2d(np.asarray(slices, dtype=np.float64))
        if x.shape[1] != self.slice_len:
            raise ValueError(f"expected slices of length {self.slice_len}, got {x.shape[1]}")
        fx = np.fft.rfft(x, n=self.nfft, axis=1)
        full = np.fft.irfft(fx[:, None, :] * self.spectra[None], n=self.nfft, axis=2)
        return full[:, :, : self.slice_len]

    def __call__(self, slices) -> np.ndarray:
        resp = self.response(slices)
        return average_pool(resp, PoolSpec(1, self.cfg.pool))


def cwt_response(slice_, cfg: CwtConfig | None = None) -> np.ndarray:
    x = np.asarray(slice_, dtype=np.float64)
    return Scalogram(x.size, cfg).response(x)[0]


def cwt_scalogram(slice_, cfg: CwtConfig | None = None) -> np.ndarray:
    """``n_scales x (len / pool)`` image; 64x64 for a 512-sample slice."""
    x = np.asarray(slice_, dtype=np.float64)
    return Scalogram(x.size, cfg)(x)[0]
