import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import reference as ref
from ts2img.encoders.spectral import (
    CwtConfig, Scalogram, StftConfig, cwt_response, cwt_scalogram, default_scales, ricker,
    stft_frames, stft_magnitude, stft_spectrogram,
)


def test_stft_config_defaults():
    cfg = StftConfig()
    assert cfg.freq_bins == 64 and cfg.hop == 8 and cfg.window_len == 126


def test_full_length_spectrogram():
    x = np.random.default_rng(0).normal(size=61_440)
    spec = stft_magnitude(x)
    assert spec.shape == (64, 7680)
    imgs = stft_spectrogram(x)
    assert imgs.shape == (120, 64, 64)
    np.testing.assert_array_equal(imgs[5], spec[:, 5 * 64:6 * 64])


def test_zero_and_constant_series():
    assert np.all(stft_spectrogram(np.zeros(1024)) == 0)
    # interior frames of a constant signal only carry DC (plus window leakage near bin 0)
    spec = stft_magnitude(np.full(2048, 3.0))
    interior = spec[:, :-20]
    assert np.all(interior[0] > 100)
    assert np.all(interior[2:] < 1e-9 * interior[0])


def test_short_series_rejected():
    with pytest.raises(ValueError):
        stft_magnitude(np.zeros(100))


def test_cosine_localised_and_matches_naive_dft():
    n, k0 = 126, 10
    t = np.arange(2048)
    x = np.cos(2 * np.pi * k0 * t / n)
    cfg = StftConfig()
    spec = stft_magnitude(x, cfg)
    assert np.all(np.argmax(spec[:, :200], axis=0) == k0)
    for f in (0, 7, 100):
        oracle = ref.windowed_dft(x[f * cfg.hop:f * cfg.hop + n], ref.hann(n))
        np.testing.assert_allclose(spec[:, f], oracle, rtol=1e-6, atol=1e-9 * oracle.max())


@settings(max_examples=20)
@given(arrays(np.float64, 300, elements=st.floats(-10, 10)))
def test_parseval_per_frame(x):
    cfg = StftConfig()
    frames = stft_frames(x, cfg)
    spec = np.fft.rfft(frames, axis=1)
    n = cfg.window_len
    # unnormalised DFT: sum |X_k|^2 over the full spectrum = N * sum |x_n|^2
    full = np.abs(spec[:, 0]) ** 2 + 2 * np.sum(np.abs(spec[:, 1:-1]) ** 2, axis=1) \
        + np.abs(spec[:, -1]) ** 2
    energy = n * np.sum(frames ** 2, axis=1)
    np.testing.assert_allclose(full, energy, rtol=1e-6, atol=1e-9)
    assert np.all(stft_magnitude(x, cfg) >= 0)


# -- Ricker / CWT ----------------------------------------------------------------

def test_scales():
    s = default_scales()
    assert s.size == 64 and s[0] == 2 ** 0.25 and s[-1] == 2.0 ** 16
    assert np.all(np.diff(s) > 0)


@pytest.mark.parametrize("a", [0.5, 1.19, 4.0, 13.0])
def test_ricker_shape(a):
    w = ricker(2 * int(np.ceil(10 * a)) + 1, a)
    assert np.argmax(w) == w.size // 2
    np.testing.assert_array_equal(w, w[::-1])
    np.testing.assert_allclose(w, ref.ricker(w.size, a), rtol=1e-13)


@pytest.mark.parametrize("a", [1.19, 2.0, 5.0, 20.0])
def test_ricker_samples_sum_to_zero(a):
    # continuous integral of the wavelet is zero; Riemann sum over +-10a is the oracle
    w = ricker(2 * int(np.ceil(10 * a)) + 1, a)
    assert abs(w.sum()) < 1e-6 * np.abs(w).sum()


def test_ricker_rejects_bad_args():
    with pytest.raises(ValueError):
        ricker(10, 0.0)
    with pytest.raises(ValueError):
        ricker(0, 1.0)


def test_scalogram_shape_and_zero():
    assert cwt_scalogram(np.zeros(512)).shape == (64, 64)
    assert np.all(cwt_scalogram(np.zeros(512)) == 0)


def test_constant_slice_interior_near_zero():
    c = 2.5
    cfg = CwtConfig()
    resp = cwt_response(np.full(512, c), cfg)
    for row, a in zip(resp, cfg.scales):
        h = cfg.half_width(a, 512)
        if h >= 512 // 2:
            continue  # no interior samples for kernels as long as the slice
        assert np.all(np.abs(row[h:512 - h]) <= 1e-6 * c)


def test_scalogram_matches_direct_convolution():
    rng = np.random.default_rng(4)
    x = rng.normal(size=512)
    cfg = CwtConfig()
    resp = cwt_response(x, cfg)
    for j in (0, 10, 25, 40, 63):
        k = cfg.kernels(512)[j]
        oracle = ref.convolve_same(x, k)
        np.testing.assert_allclose(resp[j], oracle, rtol=0, atol=1e-9 * np.abs(oracle).max())


def test_gaussian_bump_peaks_at_matching_scale():
    t = np.arange(512) - 256.0
    responses = {}
    for width in (4.0, 16.0):
        bump = np.exp(-t ** 2 / (2 * width ** 2))
        resp = cwt_response(bump)
        # Ricker of scale a correlates best with a Gaussian of sigma = a at the centre
        a = default_scales()
        centre = np.abs(resp[:, 256]) / np.sqrt(a)
        responses[width] = a[np.argmax(centre)]
        oracle = ref.convolve_same(bump, CwtConfig().kernels(512)[np.argmax(centre)])
        np.testing.assert_allclose(resp[np.argmax(centre)], oracle, atol=1e-9)
    assert responses[4.0] < responses[16.0]
    assert 2.0 <= responses[4.0] <= 8.0


@settings(max_examples=10)
@given(st.floats(-5, 5))
def test_scalogram_linear(alpha):
    x = np.random.default_rng(5).normal(size=512)
    np.testing.assert_allclose(cwt_scalogram(alpha * x), alpha * cwt_scalogram(x), atol=1e-9)


def test_batched_scalogram_equals_single():
    x = np.random.default_rng(6).normal(size=(3, 512))
    sc = Scalogram(512)
    batch = sc(x)
    for i in range(3):
        np.testing.assert_allclose(batch[i], cwt_scalogram(x[i]), atol=1e-12)
