import json

import numpy as np
import pytest

from ts2img.cli import main
from ts2img.detector import DetectionReport
from ts2img.signal import load_series

SMALL = ["--set", "channels=[4,8]", "--set", "bottleneck=16", "--set", "epochs=1",
         "--set", "batch_size=32"]


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    assert main(["generate", "--out", str(d), "--length", "1024", "--n-train", "6",
                 "--n-healthy", "3", "--n-anomalous", "3", "--seed", "2"]) == 0
    return d


def test_generate_formats(data_dir, tmp_path):
    assert load_series(data_dir / "train.csv").shape == (6, 1024)
    assert (data_dir / "labels.csv").read_text().startswith("series_id,label\n")
    assert main(["generate", "--out", str(tmp_path), "--length", "1024", "--n-train", "6",
                 "--n-healthy", "3", "--n-anomalous", "3", "--seed", "2",
                 "--format", "bin"]) == 0
    np.testing.assert_allclose(load_series(tmp_path / "train.f32"),
                               load_series(data_dir / "train.csv"), rtol=1e-6, atol=1e-6)


def test_train_calibrate_detect_evaluate(data_dir, tmp_path):
    model, report = tmp_path / "m.npz", tmp_path / "r.csv"
    assert main(["train", "--encoder", "gaf-modified", "--train", str(data_dir / "train.csv"),
                 "--out", str(model)] + SMALL) == 0
    assert main(["calibrate", "--model", str(model), "--train", str(data_dir / "train.csv"),
                 "--percentile", "90"]) == 0
    assert main(["detect", "--model", str(model), "--input", str(data_dir / "test.csv"),
                 "--out", str(report)]) == 0
    rep = DetectionReport.from_csv(report)
    assert len(rep.scores) == 6
    from ts2img.pipeline import AnomalyDetector
    t = AnomalyDetector.load(model).threshold
    assert t.percentile == 90 and rep.threshold.value == t.value
    assert main(["evaluate", "--report", str(report), "--labels", str(data_dir / "labels.csv"),
                 "--out-dir", str(tmp_path / "ev")]) == 0
    m = json.loads((tmp_path / "ev" / "metrics.json").read_text())
    assert {"tpr", "fpr", "f1", "auc"} <= set(m)
    assert (tmp_path / "ev" / "roc.csv").exists()


def test_run_with_config_file(data_dir, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"encoder": "none", "channels": [2, 2, 4], "bottleneck": 8,
                               "epochs": 1}))
    assert main(["run", "--config", str(cfg), "--train", str(data_dir / "train.csv"),
                 "--test", str(data_dir / "test.csv"), "--labels",
                 str(data_dir / "labels.csv"), "--out-dir", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "report.csv").exists()


def test_encode_and_render(data_dir, tmp_path):
    out = tmp_path / "img.npz"
    assert main(["encode", "--encoder", "mtf-modified", "--input", str(data_dir / "test.csv"),
                 "--train", str(data_dir / "train.csv"), "--out", str(out)]) == 0
    with np.load(out) as z:
        assert z["images"].shape == (6, 2, 64, 64)
    assert main(["render", "--encoder", "rp-original", "--input", str(data_dir / "test.csv"),
                 "--series", "1", "--out-dir", str(tmp_path / "png")]) == 0
    assert sorted(p.name for p in (tmp_path / "png").iterdir()) == \
        ["1_0_rp-original.png", "1_1_rp-original.png"]


def test_bench(capsys):
    assert main(["bench", "--encoder", "gs-p1", "--count", "5"]) == 0
    assert "gs-p1" in capsys.readouterr().out


def test_errors_exit_nonzero(data_dir, tmp_path, capsys):
    assert main(["detect", "--model", str(tmp_path / "missing.npz"), "--input",
                 str(data_dir / "test.csv"), "--out", str(tmp_path / "r.csv")]) == 2
    assert main(["train", "--encoder", "none", "--set", "arch=\"2d\"",
                 "--train", str(data_dir / "train.csv"), "--out", str(tmp_path / "m.npz")]) == 2
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["encode", "--encoder", "gaf-modified", "--input", str(data_dir / "test.csv"),
              "--out", str(tmp_path / "x.npz")])
