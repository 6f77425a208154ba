"""Synthetic vibration-like data with injected anomalies.

Healthy series are a sum of sinusoids with per-series gain, frequency and
phase jitter plus Gaussian noise. An anomalous series is a healthy series
with exactly one of three defects added:

``burst``  amplitude envelope ``1 + magnitude * hann`` over ``extent`` samples
``shift``  the tonal components replaced by ones at ``(1 + magnitude)`` times
           their frequency over ``extent`` samples
``spike``  an additive Hann-shaped transient of peak ``magnitude`` and random
           sign, kept inside a single slice
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ANOMALY_KINDS = ("burst", "shift", "spike")


@dataclass(frozen=True)
class AnomalySpec:
    kind: str
    magnitude: float
    extent: int

    def __post_init__(self):
        if self.kind not in ANOMALY_KINDS:
            raise ValueError(f"unknown anomaly kind {self.kind!r}")
        if self.extent <= 0:
            raise ValueError("anomaly extent must be positive")


def default_anomalies() -> tuple[AnomalySpec, ...]:
    return (AnomalySpec("burst", 1.0, 256), AnomalySpec("shift", 0.3, 512),
            AnomalySpec("spike", 3.0, 32))


@dataclass(frozen=True)
class SyntheticSpec:
    length: int = 6144
    sample_rate_hz: float = 1024.0
    frequencies: tuple[float, ...] = (17.0, 41.0, 97.0)
    amplitudes: tuple[float, ...] = (1.0, 0.5, 0.25)
    gain_jitter: float = 0.2
    freq_jitter: float = 0.02
    noise: float = 0.1
    n_train: int = 200
    n_test_healthy: int = 50
    n_test_anomalous: int = 50
    anomalies: tuple[AnomalySpec, ...] = field(default_factory=default_anomalies)
    slice_len: int = 512  # spikes never straddle a slice boundary

    def __post_init__(self):
        for a in self.anomalies:
            if a.extent > self.length:
                raise ValueError(f"anomaly extent {a.extent} exceeds series length {self.length}")
        if len(self.frequencies) != len(self.amplitudes):
            raise ValueError("frequencies and amplitudes differ in length")


@dataclass
class SyntheticDataset:
    train: np.ndarray
    test: np.ndarray
    labels: np.ndarray      # 0 healthy, 1 anomalous
    kinds: list[str]        # "" for healthy test series
    base: np.ndarray        # test series before anomaly injection


class _Tones:
    """Per-series random draw of the tonal model."""

    def __init__(self, spec: SyntheticSpec, rng):
        k = len(spec.frequencies)
        self.gain = 1.0 + spec.gain_jitter * rng.uniform(-1, 1)
        self.freqs = np.asarray(spec.frequencies) * (1.0 + spec.freq_jitter * rng.uniform(-1, 1, k))
        self.phases = rng.uniform(0, 2 * np.pi, k)
        self.amps = np.asarray(spec.amplitudes)
        self.fs = spec.sample_rate_hz

    def signal(self, t_idx, freq_scale=1.0):
        t = np.asarray(t_idx, dtype=np.float64)[:, None] / self.fs
        arg = 2 * np.pi * self.freqs[None] * freq_scale * t + self.phases[None]
        return self.gain * (self.amps[None] * np.sin(arg)).sum(axis=1)


def _healthy(spec, rng):
    tones = _Tones(spec, rng)
    clean = tones.signal(np.arange(spec.length))
    return clean + spec.noise * rng.standard_normal(spec.length), tones


def inject(x, anomaly: AnomalySpec, rng, tones: _Tones | None = None, slice_len: int = 512):
    """Return a copy of ``x`` with one anomaly added (position drawn from ``rng``)."""
    y = np.array(x, dtype=np.float64)
    n, e = y.size, anomaly.extent
    if anomaly.kind == "spike":
        e = min(e, slice_len)
        k = int(rng.integers(0, n // slice_len))
        start = k * slice_len + int(rng.integers(0, slice_len - e + 1))
    else:
        start = int(rng.integers(0, n - e + 1))
    seg = slice(start, start + e)
    env = np.hanning(e + 2)[1:-1]
    if anomaly.kind == "burst":
        y[seg] *= 1.0 + anomaly.magnitude * env
    elif anomaly.kind == "spike":
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        y[seg] += sign * anomaly.magnitude * env
    elif anomaly.kind == "shift":
        if tones is None:
            raise ValueError("frequency shift needs the series' tonal model")
        idx = np.arange(start, start + e)
        y[seg] += tones.signal(idx, 1.0 + anomaly.magnitude) - tones.signal(idx)
    return y


def generate_synthetic(spec: SyntheticSpec = SyntheticSpec(), seed: int = 0) -> SyntheticDataset:
    """Deterministic train/test split; anomaly kinds cycle through ``spec.anomalies``."""
    rng = np.random.default_rng(seed)
    train = np.stack([_healthy(spec, rng)[0] for _ in range(spec.n_train)]) \
        if spec.n_train else np.empty((0, spec.length))
    test, base, labels, kinds = [], [], [], []
    for _ in range(spec.n_test_healthy):
        x, _ = _healthy(spec, rng)
        test.append(x), base.append(x), labels.append(0), kinds.append("")
    for i in range(spec.n_test_anomalous):
        x, tones = _healthy(spec, rng)
        a = spec.anomalies[i % len(spec.anomalies)]
        test.append(inject(x, a, rng, tones, spec.slice_len))
        base.append(x), labels.append(1), kinds.append(a.kind)
    # interleave healthy and anomalous deterministically
    order = np.random.default_rng(seed + 1).permutation(len(test))
    test = np.array(test).reshape(-1, spec.length)[order] if test else np.empty((0, spec.length))
    base = np.array(base).reshape(-1, spec.length)[order] if base else np.empty((0, spec.length))
    return SyntheticDataset(train, test, np.array(labels, dtype=int)[order],
                            [kinds[i] for i in order], base)


def energy_detector(data, window: int = 32) -> np.ndarray:
    """Largest short-window energy per series: a model-free separability check."""
    x = np.atleast_2d(np.asarray(data, dtype=np.float64))
    c = np.cumsum(np.pad(x * x, ((0, 0), (1, 0))), axis=1)
    return (c[:, window:] - c[:, :-window]).max(axis=1)
