import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ts2img.metrics import confusion, f1, pairwise_auc, roc_auc, summary, write_summary


def test_confusion_hand_count():
    # 2 anomalous above, 1 anomalous below, 1 healthy above, 3 healthy below
    scores = [5, 6, 1, 7, 0, 1, 2]
    labels = [1, 1, 1, 0, 0, 0, 0]
    c = confusion(scores, labels, 3)
    assert tuple(c) == (2, 1, 3, 1)
    assert c.tpr == pytest.approx(2 / 3) and c.fpr == pytest.approx(1 / 4)
    assert c.f1 == pytest.approx(4 / 6)


def test_confusion_edge_cases():
    c = confusion([5, 6, 1, 0], [1, 1, 0, 0], 3)
    assert c.fp == 0 and c.fn == 0
    c = confusion([5, 6, 1, 0], [1, 1, 0, 0], -1)
    assert c.tn == 0 and c.fn == 0
    only_pos = confusion([1, 2], [1, 1], 0)
    assert tuple(only_pos) == (2, 0, 0, 0)
    with pytest.raises(ValueError):
        only_pos.fpr


def test_f1_examples():
    assert f1(1, 0, 0) == 1.0
    assert f1(2, 1, 1) == pytest.approx(0.6666666666666666)
    assert f1(0, 3, 2) == 0.0
    assert np.isnan(f1(0, 0, 0))


def test_auc_examples():
    assert roc_auc([3, 4, 1, 2], [1, 1, 0, 0]).auc == 1.0
    assert roc_auc([2, 2, 2, 2], [1, 0, 1, 0]).auc == 0.5
    r = roc_auc([3, 1, 2, 0], [1, 1, 0, 0])
    assert r.auc == 0.75
    # brute force over the four anomalous/healthy pairs
    pairs = [(a > h) + 0.5 * (a == h) for a, h in itertools.product([3, 1], [2, 0])]
    assert np.mean(pairs) == 0.75


def test_roc_endpoints_and_monotone():
    rng = np.random.default_rng(0)
    s, y = rng.normal(size=40), rng.integers(0, 2, 40)
    y[:2] = [0, 1]
    r = roc_auc(s, y)
    assert (r.fpr[0], r.tpr[0]) == (0.0, 0.0)
    assert (r.fpr[-1], r.tpr[-1]) == (1.0, 1.0)
    assert np.all(np.diff(r.fpr) >= 0) and np.all(np.diff(r.tpr) >= 0)


def test_single_class_rejected():
    with pytest.raises(ValueError):
        roc_auc([1, 2], [0, 0])


labelled = st.integers(2, 60).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 6).map(float), min_size=n, max_size=n),
                        st.lists(st.integers(0, 1), min_size=n, max_size=n)))


@given(labelled)
def test_trapezoid_equals_pairwise(data):
    s, y = data
    if len(set(y)) < 2:
        return
    assert abs(roc_auc(s, y).auc - pairwise_auc(s, y)) <= 1e-12


@given(labelled)
def test_auc_invariant_to_monotone_transform(data):
    s, y = data
    if len(set(y)) < 2:
        return
    s = np.asarray(s)
    assert roc_auc(np.exp(s) * 3 - 1, y).auc == pytest.approx(roc_auc(s, y).auc, abs=1e-12)


def test_summary_and_exports(tmp_path):
    import json

    m = summary([5, 6, 1, 7, 0, 1, 2], [1, 1, 1, 0, 0, 0, 0], 3)
    assert set(m) >= {"tpr", "fpr", "f1", "auc"}
    p = write_summary(tmp_path / "m.json", m)
    assert json.loads(p.read_text())["tp"] == 2
    roc = roc_auc([3, 1, 2, 0], [1, 1, 0, 0]).to_csv(tmp_path / "roc.csv")
    lines = roc.read_text().splitlines()
    assert lines[0] == "threshold,fpr,tpr" and lines[-1].endswith(",1.0,1.0")
