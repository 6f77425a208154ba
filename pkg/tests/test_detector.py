import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ts2img.detector import (
    DetectionReport, Threshold, calibrate, detect, residual, residuals, score_series,
)

vals = st.floats(-1e3, 1e3)


def order_statistic_percentile(values, p):
    """Linear interpolation between closest ranks, written out by hand."""
    v = sorted(values)
    pos = (len(v) - 1) * p / 100.0
    lo = int(np.floor(pos))
    hi = min(lo + 1, len(v) - 1)
    return v[lo] + (v[hi] - v[lo]) * (pos - lo)


def test_residual_examples():
    assert residual([1.0, 2.0], [1.0, 2.0]) == 0
    assert residual([1.0, 2.0], [0.0, 0.0]) == 3
    img = np.ones((64, 64))
    assert residual(img, np.zeros((64, 64))) == 4096
    with pytest.raises(ValueError):
        residual([1.0], [1.0, 2.0])


@given(arrays(np.float64, 6, elements=vals), arrays(np.float64, 6, elements=vals),
       arrays(np.float64, 6, elements=vals))
def test_residual_is_a_metric(a, b, c):
    assert residual(a, b) == residual(b, a)
    assert (residual(a, b) == 0) == bool(np.all(a == b))
    assert residual(a, c) <= residual(a, b) + residual(b, c) + 1e-9


def test_batched_residuals():
    a = np.arange(12.0).reshape(3, 2, 2)
    np.testing.assert_array_equal(residuals(a, np.zeros_like(a)), [6, 22, 38])


def test_calibrate_examples():
    assert calibrate(np.arange(1, 101), 99).value == pytest.approx(99.01)
    assert order_statistic_percentile(range(1, 101), 99) == pytest.approx(99.01)
    assert calibrate(np.full(7, 2.5)).value == 2.5
    r = np.random.default_rng(0).normal(size=50)
    assert calibrate(r, 100).value == r.max()
    t = calibrate(r)
    assert t.percentile == 99 and t.calibration_count == 50


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=300), st.floats(1, 100))
def test_calibrate_matches_order_statistics(values, p):
    assert calibrate(values, p).value == pytest.approx(order_statistic_percentile(values, p),
                                                       rel=1e-9, abs=1e-9)


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=500))
def test_at_most_one_percent_exceed(values):
    t = calibrate(values, 99)
    exceed = np.sum(np.asarray(values) > t.value)
    assert exceed <= 0.01 * len(values) + 1


def test_calibrate_rejects():
    with pytest.raises(ValueError):
        calibrate([])
    with pytest.raises(ValueError):
        calibrate([1.0], 0)


def test_score_series_examples():
    s = score_series([0.1, 5.0, 0.2], Threshold(1.0))
    assert s.anomalous and s.max_residual == 5.0
    assert not score_series([0.1, 0.9], 1.0).anomalous
    assert not score_series([0.3, 1.0], 1.0).anomalous  # tie stays healthy
    with pytest.raises(ValueError):
        score_series([], 1.0)


@given(arrays(np.float64, st.integers(1, 10), elements=st.floats(0, 10)),
       st.integers(0, 9), st.floats(0, 5), st.floats(0, 10))
def test_score_monotone(r, k, bump, tau):
    k = k % r.size
    before = score_series(r, tau).anomalous
    r2 = r.copy()
    r2[k] += bump
    assert score_series(r2, tau).anomalous or not before


def test_report_csv_round_trip(tmp_path):
    rep = detect([[1.0, 3.0], [0.5, 0.2]], Threshold(2.0), ids=["a", "b"])
    np.testing.assert_array_equal(rep.decisions, [True, False])
    path = rep.to_csv(tmp_path / "r.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "series_id,max_residual,threshold,decision"
    assert lines[1] == "a,3.0,2.0,1"
    back = DetectionReport.from_csv(path)
    assert back.ids == ["a", "b"]
    np.testing.assert_array_equal(back.max_residuals, rep.max_residuals)
