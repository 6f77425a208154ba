import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ts2img.imageops import PoolSpec, average_pool, minmax_stretch, png_name, write_png


def test_pool_2x2():
    np.testing.assert_array_equal(average_pool([[1, 2], [3, 4]], PoolSpec(2, 2)), [[2.5]])


def test_pool_constant_and_64_pixel_output():
    out = average_pool(np.full((512, 512), 3.25))
    assert out.shape == (64, 64)
    assert np.all(out == 3.25)


def test_pool_rejects_non_divisible():
    with pytest.raises(ValueError):
        average_pool(np.zeros((10, 8)), PoolSpec(3, 2))


@given(arrays(np.float64, (8, 8), elements=st.floats(-100, 100)),
       st.floats(-5, 5), st.floats(-5, 5))
def test_pool_commutes_with_affine_maps(x, a, b):
    spec = PoolSpec(4, 2)
    np.testing.assert_allclose(average_pool(a * x + b, spec), a * average_pool(x, spec) + b,
                               atol=1e-9)


def test_pool_on_stacks():
    x = np.arange(2 * 4 * 4, dtype=float).reshape(2, 4, 4)
    out = average_pool(x, PoolSpec(2, 2))
    assert out.shape == (2, 2, 2)
    np.testing.assert_array_equal(out[1], average_pool(x[1], PoolSpec(2, 2)))


def test_stretch():
    np.testing.assert_array_equal(minmax_stretch([[0, 2]]), [[0, 1]])
    assert np.all(minmax_stretch(np.full((3, 3), 7.0)) == 0.5)
    y = minmax_stretch(np.random.default_rng(0).normal(size=(5, 5)))
    assert y.min() == 0 and y.max() == 1


def test_png_written(tmp_path):
    from PIL import Image

    p = write_png(tmp_path / png_name("s1", 3, "gaf-modified"), np.arange(16.0).reshape(4, 4))
    assert p.name == "s1_3_gaf-modified.png"
    img = Image.open(p)
    assert img.mode == "L" and img.size == (4, 4)
    px = np.asarray(img)
    assert px.min() == 0 and px.max() == 255
