import numpy as np
import pytest

from ts2img.encoders import ENCODERS, Encoder, EncoderSettings


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(3)
    t = np.arange(6144) / 1024
    return np.sin(2 * np.pi * 17 * t)[None] + 0.1 * rng.standard_normal((3, 6144))


@pytest.mark.parametrize("name", ENCODERS)
def test_shapes(name, data):
    enc = Encoder(name)
    if enc.needs_fit:
        enc.fit(data)
    out = enc.encode(data[0])
    if name == "none":
        assert out.shape == (12, 512)
        np.testing.assert_array_equal(out.ravel(), data[0])
    else:
        assert out.shape == (12, 64, 64)
    assert np.all(np.isfinite(out))


@pytest.mark.parametrize("name", ENCODERS)
def test_encode_many_matches_encode(name, data):
    enc = Encoder(name)
    if enc.needs_fit:
        enc.fit(data)
    many = enc.encode_many(data, workers=2)
    assert many.shape[:2] == (3, 12)
    np.testing.assert_array_equal(many[1], enc.encode(data[1]))


def test_fit_required():
    for name in ("gaf-modified", "mtf-modified"):
        enc = Encoder(name)
        assert enc.needs_fit
        with pytest.raises(RuntimeError):
            enc.encode(np.zeros(512))
    for name in ("gaf-original", "rp-original", "sp", "sc", "none"):
        assert not Encoder(name).needs_fit


def test_unknown_encoder():
    with pytest.raises(ValueError):
        Encoder("wavelet")


def test_routing_flags():
    assert Encoder("none").is_raw
    assert not Encoder("sc").is_raw
    assert Encoder("gaf-modified").family == "gaf"
    assert Encoder("gaf-modified").variant == "modified"


@pytest.mark.parametrize("name", [n for n in ENCODERS if Encoder(n).needs_fit])
def test_state_round_trip(name, data):
    enc = Encoder(name).fit(data)
    clone = Encoder(name).load_state(enc.state())
    np.testing.assert_array_equal(clone.encode(data[2]), enc.encode(data[2]))


def test_settings_change_slice_count(data):
    enc = Encoder("rp-original", EncoderSettings(slice_len=1024, image_size=128))
    assert enc.encode(data[0]).shape[0] == 6
