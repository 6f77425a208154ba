"""End-to-end detection: slice, encode, train on healthy data, calibrate, score."""
from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .autoencoder import TrainConfig, build_network, load_checkpoint, save_checkpoint, train
from .detector import DetectionReport, Threshold, calibrate, detect, residuals
from .encoders import ENCODERS, Encoder, EncoderSettings
from .metrics import roc_auc, summary, write_summary
from .signal import load_series

WORKERS_ENV = "TS2IMG_WORKERS"

#: Published encoding times for 10,000 slices (seconds); `bench` shows them for comparison only.
REFERENCE_ENCODE_SECONDS = {
    "gaf-original": 24, "gaf-modified": 27, "mtf-original": 34, "mtf-modified": 264,
    "rp-original": 34, "rp-modified": 36, "sp": 4, "sc": 62,
    "gs-original": 1, "gs-p1": 1, "gs-minmax": 1,
}


@dataclass
class PipelineConfig:
    encoder: str = "sc"
    slice_len: int = 512
    image_size: int = 64
    margin: float = 1.2
    sax_bins: int = 500
    gs_stride: int = 7
    stft_window: int = 126
    stft_hop: int = 8
    cwt_support: float = 10.0
    arch: str = "auto"                    # auto | 1d | 2d
    channels: tuple[int, ...] | None = None  # None: full-size widths
    bottleneck: int = 300
    epochs: int = 10
    batch_size: int = 200
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    percentile: float = 99.0
    seed: int = 0
    repetitions: int = 5
    workers: int = 1
    dtype: str = "float64"

    def __post_init__(self):
        if self.encoder not in ENCODERS:
            raise ValueError(f"unknown encoder {self.encoder!r}")
        if self.channels is not None:
            self.channels = tuple(int(c) for c in self.channels)
        expected = "1d" if self.encoder == "none" else "2d"
        if self.arch == "auto":
            self.arch = expected
        if self.arch != expected:
            raise ValueError(
                f"encoder {self.encoder!r} requires the {expected} network, not {self.arch!r}"
            )
        if self.dtype not in ("float64", "float32"):
            raise ValueError("dtype must be float64 or float32")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    @classmethod
    def from_file(cls, path, **overrides) -> "PipelineConfig":
        d = json.loads(Path(path).read_text())
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["channels"] is not None:
            d["channels"] = list(d["channels"])
        return d

    def encoder_settings(self) -> EncoderSettings:
        return EncoderSettings(self.slice_len, self.image_size, self.margin, self.sax_bins,
                               self.gs_stride, self.stft_window, self.stft_hop, self.cwt_support)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.epochs, self.batch_size, self.seed, self.lr, self.beta1,
                           self.beta2, self.epsilon)

    def network_overrides(self) -> dict:
        o = {"bottleneck": self.bottleneck}
        if self.channels is not None:
            o["channels"] = self.channels
        if self.arch == "2d":
            o["image_size"] = self.image_size
        else:
            o["length"] = self.slice_len
        return o


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, int(requested or 1))


class AnomalyDetector:
    """A fitted encoder + auto-encoder + threshold."""

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.encoder = Encoder(cfg.encoder, cfg.encoder_settings())
        self.network = None
        self.adam = None
        self.history: list[float] = []
        self.threshold: Threshold | None = None

    # -- stages ----------------------------------------------------------------

    def encode(self, data) -> np.ndarray:
        """``(n_series, n_slices, ...)`` encoded slices."""
        return self.encoder.encode_many(data, worker_count(self.cfg.workers))

    def fit_encoder(self, train_data) -> "AnomalyDetector":
        self.encoder.fit(train_data)
        return self

    def fit_network(self, images, log=None) -> "AnomalyDetector":
        cfg = self.cfg
        flat = images.reshape((-1,) + images.shape[2:])
        self.network = build_network(cfg.arch, seed=cfg.seed, dtype=np.dtype(cfg.dtype),
                                     **cfg.network_overrides())
        self.adam, self.history = train(self.network, flat, cfg.train_config(), log=log)
        return self

    def slice_residuals(self, images) -> np.ndarray:
        """l1 residual of every slice, ``(n_series, n_slices)``."""
        if self.network is None:
            raise RuntimeError("the auto-encoder has not been trained")
        n, k = images.shape[:2]
        flat = images.reshape((n * k,) + images.shape[2:])
        recon = self.network.reconstruct(flat)
        return residuals(flat, recon).reshape(n, k)

    def calibrate(self, train_images=None, train_data=None) -> Threshold:
        if train_images is None:
            train_images = self.encode(train_data)
        self.threshold = calibrate(self.slice_residuals(train_images).ravel(), self.cfg.percentile)
        return self.threshold

    def fit(self, train_data, log=None) -> "AnomalyDetector":
        """Fit encoder state, train on healthy slices, set the threshold."""
        self.fit_encoder(train_data)
        images = self.encode(train_data)
        self.fit_network(images, log=log)
        self.calibrate(images)
        return self

    def detect(self, data, ids=None) -> DetectionReport:
        if self.threshold is None:
            raise RuntimeError("threshold not calibrated")
        res = self.slice_residuals(self.encode(data))
        return detect(list(res), self.threshold, ids)

    # -- persistence ------------------------------------------------------------

    def save(self, path) -> Path:
        extra = {f"encoder/{k}": v for k, v in self.encoder.state().items()}
        if self.threshold is not None:
            t = self.threshold
            extra["threshold"] = np.array([t.value, t.percentile, t.calibration_count])
        return save_checkpoint(path, self.network, self.adam, self.cfg.train_config(), extra,
                               {"pipeline": self.cfg.to_dict()})

    @classmethod
    def load(cls, path) -> "AnomalyDetector":
        net, adam, _, extra, meta = load_checkpoint(path)
        det = cls(PipelineConfig.from_dict(meta["pipeline"]))
        det.network, det.adam = net, adam
        det.encoder.load_state({k[8:]: v for k, v in extra.items() if k.startswith("encoder/")})
        if "threshold" in extra:
            v, p, c = extra["threshold"]
            det.threshold = Threshold(float(v), float(p), int(c))
        return det


def read_labels(path) -> tuple[list[str], np.ndarray]:
    import csv

    ids, labels = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ids.append(row["series_id"])
            labels.append(int(row["label"]))
    return ids, np.array(labels, dtype=int)


def write_labels(path, labels, ids=None) -> Path:
    path = Path(path)
    ids = ids if ids is not None else [str(i) for i in range(len(labels))]
    with open(path, "w") as fh:
        fh.write("series_id,label\n")
        for i, y in zip(ids, labels):
            fh.write(f"{i},{int(y)}\n")
    return path


def evaluate(report: DetectionReport, labels, ids=None) -> dict:
    """Metrics of a report against labels (aligned by series id when given)."""
    labels = np.asarray(labels, dtype=int)
    if ids is not None:
        lookup = dict(zip(ids, labels))
        missing = [s for s in report.ids if s not in lookup]
        if missing:
            raise ValueError(f"no label for series {missing[:5]}")
        labels = np.array([lookup[s] for s in report.ids])
    return summary(report.max_residuals, labels, report.threshold.value)


@dataclass
class PipelineResult:
    report: DetectionReport
    metrics: dict | None
    detector: AnomalyDetector = field(repr=False)


def run_pipeline(cfg: PipelineConfig, train, test, labels=None, out_dir=None,
                 log=None) -> PipelineResult:
    """Run the whole framework; ``train``/``test`` are arrays or dataset paths.

    ``labels`` is an array or a ``series_id,label`` CSV. When ``out_dir`` is
    given the checkpoint, report CSV, metrics JSON and ROC CSV are written there.
    """
    train_data = load_series(train) if isinstance(train, (str, Path)) else np.asarray(train)
    test_data = load_series(test) if isinstance(test, (str, Path)) else np.asarray(test)
    label_ids = None
    if isinstance(labels, (str, Path)):
        label_ids, labels = read_labels(labels)
    det = AnomalyDetector(cfg).fit(train_data, log=log)
    report = det.detect(test_data)
    metrics = evaluate(report, labels, label_ids) if labels is not None else None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        det.save(out / "model.npz")
        report.to_csv(out / "report.csv")
        if metrics is not None:
            write_summary(out / "metrics.json", metrics)
            lab = np.asarray(labels) if label_ids is None else \
                np.array([dict(zip(label_ids, labels))[s] for s in report.ids])
            roc_auc(report.max_residuals, lab).to_csv(out / "roc.csv")
    return PipelineResult(report, metrics, det)


def run_repeated(cfg: PipelineConfig, train, test, labels, repetitions: int | None = None,
                 log=None) -> dict:
    """Repeat with seeds ``seed, seed+1, ...``; mean and std of every metric."""
    reps = repetitions or cfg.repetitions
    runs = [run_pipeline(replace(cfg, seed=cfg.seed + r), train, test, labels, log=log).metrics
            for r in range(reps)]
    keys = ("tpr", "fpr", "f1", "auc")
    return {k: {"mean": float(np.mean([m[k] for m in runs])),
                "std": float(np.std([m[k] for m in runs]))} for k in keys} | {"runs": runs}


def bench_encode(encoder: str = "sc", slice_count: int = 10_000, settings=None,
                 seed: int = 0) -> dict:
    """Wall-clock time to encode ``slice_count`` random slices."""
    settings = settings or EncoderSettings()
    enc = Encoder(encoder, settings)
    rng = np.random.default_rng(seed)
    if enc.needs_fit:
        enc.fit(rng.standard_normal((4, settings.slice_len * 8)))
    if slice_count == 0:
        return {"encoder": encoder, "slices": 0, "seconds": 0.0, "slices_per_second": 0.0,
                "reference_seconds_10k": REFERENCE_ENCODE_SECONDS.get(encoder)}
    series = rng.standard_normal(slice_count * settings.slice_len)
    t0 = time.perf_counter()
    out = enc.encode(series)
    dt = time.perf_counter() - t0
    return {"encoder": encoder, "slices": int(out.shape[0]), "seconds": dt,
            "slices_per_second": out.shape[0] / dt if dt > 0 else float("inf"),
            "reference_seconds_10k": REFERENCE_ENCODE_SECONDS.get(encoder)}


def render(encoder: Encoder, series, out_dir, series_id="0", slices=None) -> list[Path]:
    """PNG per slice image, named ``{series}_{slice}_{encoder}.png``."""
    from .imageops import png_name, write_png

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    images = encoder.encode(series)
    idx = range(len(images)) if slices is None else slices
    paths = []
    for k in idx:
        img = images[k]
        if img.ndim == 1:
            img = img[None, :]
        paths.append(write_png(out / png_name(series_id, k, encoder.name), img))
    return paths
