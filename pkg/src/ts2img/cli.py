"""Command-line interface: ``ts2img <command> ...``.

Every command that needs pipeline settings reads them from an optional JSON
config file (``--config``), then applies ``--set key=value`` overrides.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .detector import DetectionReport
from .encoders import ENCODERS, Encoder
from .metrics import roc_auc, write_summary
from .pipeline import (
    AnomalyDetector, PipelineConfig, bench_encode, evaluate, read_labels, render,
    run_pipeline, run_repeated, write_labels,
)
from .signal import load_series, write_binary_series, write_csv_series
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger("ts2img")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(args) -> PipelineConfig:
    d = {}
    if getattr(args, "config", None):
        d = json.loads(Path(args.config).read_text())
    for item in getattr(args, "set", None) or []:
        key, _, value = item.partition("=")
        d[key.strip().replace("-", "_")] = _parse_value(value)
    if getattr(args, "encoder", None):
        d["encoder"] = args.encoder
    if getattr(args, "seed", None) is not None:
        d["seed"] = args.seed
    if getattr(args, "workers", None):
        d["workers"] = args.workers
    return PipelineConfig.from_dict(d)


def _load(path, fmt):
    return load_series(path, fmt)


def _ids(n):
    return [str(i) for i in range(n)]


def cmd_generate(args):
    spec = SyntheticSpec(length=args.length, n_train=args.n_train,
                         n_test_healthy=args.n_healthy, n_test_anomalous=args.n_anomalous,
                         noise=args.noise)
    ds = generate_synthetic(spec, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        write_csv_series(out / "train.csv", ds.train)
        write_csv_series(out / "test.csv", ds.test)
    else:
        write_binary_series(out / "train.f32", ds.train)
        write_binary_series(out / "test.f32", ds.test)
    write_labels(out / "labels.csv", ds.labels)
    (out / "kinds.csv").write_text(
        "series_id,kind\n" + "".join(f"{i},{k}\n" for i, k in enumerate(ds.kinds)))
    print(f"wrote {len(ds.train)} training and {len(ds.test)} test series to {out}")


def cmd_encode(args):
    if args.model:
        det = AnomalyDetector.load(args.model)
        enc = det.encoder
    else:
        cfg = load_config(args)
        enc = Encoder(cfg.encoder, cfg.encoder_settings())
        if enc.needs_fit:
            if not args.train:
                raise SystemExit(f"encoder {cfg.encoder} needs --train data (or --model)")
            enc.fit(_load(args.train, args.format))
    images = enc.encode_many(_load(args.input, args.format))
    np.savez(args.out, images=images, encoder=np.array(enc.name))
    print(f"encoded {images.shape[0]} series into {images.shape[1]} slices of "
          f"{'x'.join(map(str, images.shape[2:]))} -> {args.out}")


def cmd_train(args):
    cfg = load_config(args)
    train_data = _load(args.train, args.format)
    det = AnomalyDetector(cfg)
    det.fit_encoder(train_data)
    images = det.encode(train_data)
    det.fit_network(images, log=log.info)
    if not args.no_calibrate:
        det.calibrate(images)
    det.save(args.out)
    msg = f"trained {cfg.arch} auto-encoder on {images.shape[0] * images.shape[1]} slices"
    if det.threshold is not None:
        msg += f"; threshold {det.threshold.value:.6g}"
    print(msg + f" -> {args.out}")


def cmd_calibrate(args):
    det = AnomalyDetector.load(args.model)
    if args.percentile is not None:
        det.cfg.percentile = args.percentile
    t = det.calibrate(train_data=_load(args.train, args.format))
    det.save(args.out or args.model)
    print(json.dumps(asdict(t)))


def cmd_detect(args):
    det = AnomalyDetector.load(args.model)
    data = _load(args.input, args.format)
    report = det.detect(data, _ids(len(data)))
    report.to_csv(args.out)
    print(f"{int(report.decisions.sum())}/{len(report.scores)} series flagged "
          f"(threshold {report.threshold.value:.6g}) -> {args.out}")


def cmd_evaluate(args):
    report = DetectionReport.from_csv(args.report)
    ids, labels = read_labels(args.labels)
    metrics = evaluate(report, labels, ids)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_summary(out / "metrics.json", metrics)
    lookup = dict(zip(ids, labels))
    roc_auc(report.max_residuals, [lookup[s] for s in report.ids]).to_csv(out / "roc.csv")
    print(json.dumps({k: metrics[k] for k in ("tpr", "fpr", "f1", "auc")}))


def cmd_run(args):
    cfg = load_config(args)
    if args.repetitions and args.repetitions > 1:
        res = run_repeated(cfg, args.train, args.test, args.labels, args.repetitions,
                           log=log.info)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_summary(out / "metrics.json", res)
        print(json.dumps({k: res[k] for k in ("tpr", "fpr", "f1", "auc")}))
        return
    res = run_pipeline(cfg, args.train, args.test, args.labels, args.out_dir, log=log.info)
    if res.metrics is not None:
        print(json.dumps({k: res.metrics[k] for k in ("tpr", "fpr", "f1", "auc")}))


def cmd_render(args):
    if args.model:
        enc = AnomalyDetector.load(args.model).encoder
    else:
        cfg = load_config(args)
        enc = Encoder(cfg.encoder, cfg.encoder_settings())
        if enc.needs_fit:
            if not args.train:
                raise SystemExit(f"encoder {cfg.encoder} needs --train data (or --model)")
            enc.fit(_load(args.train, args.format))
    data = _load(args.input, args.format)
    slices = [int(s) for s in args.slices.split(",")] if args.slices else None
    paths = render(enc, data[args.series], args.out_dir, str(args.series), slices)
    print(f"wrote {len(paths)} PNG files to {args.out_dir}")


def cmd_bench(args):
    names = ENCODERS[1:] if args.encoder == "all" else [args.encoder]
    for name in names:
        r = bench_encode(name, args.count)
        ref = r["reference_seconds_10k"]
        ref_txt = f"  (reported for 10k slices: {ref} s)" if ref is not None else ""
        print(f"{name:13s} {r['slices']:6d} slices {r['seconds']:9.3f} s "
              f"{r['slices_per_second']:10.1f} slices/s{ref_txt}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ts2img", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def pipeline_opts(sp, encoder=True):
        sp.add_argument("--config", help="JSON pipeline config")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry (repeatable)")
        if encoder:
            sp.add_argument("--encoder", choices=ENCODERS)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int, help="encoding threads (env TS2IMG_WORKERS)")

    def fmt(sp):
        sp.add_argument("--format", choices=("csv", "bin"), default=None,
                        help="dataset format (default: from file extension)")

    g = sub.add_parser("generate", help="write a synthetic train/test dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--length", type=int, default=6144)
    g.add_argument("--n-train", type=int, default=200)
    g.add_argument("--n-healthy", type=int, default=50)
    g.add_argument("--n-anomalous", type=int, default=50)
    g.add_argument("--noise", type=float, default=0.1)
    g.add_argument("--format", choices=("csv", "bin"), default="csv")
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("encode", help="encode series into slice images (.npz)")
    pipeline_opts(e)
    fmt(e)
    e.add_argument("--input", required=True)
    e.add_argument("--train", help="training data for fitted encoders")
    e.add_argument("--model", help="take the fitted encoder from a checkpoint")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_encode)

    t = sub.add_parser("train", help="fit encoder and auto-encoder on healthy data")
    pipeline_opts(t)
    fmt(t)
    t.add_argument("--train", required=True)
    t.add_argument("--out", required=True, help="checkpoint path (.npz)")
    t.add_argument("--no-calibrate", action="store_true")
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("calibrate", help="set the threshold from healthy residuals")
    fmt(c)
    c.add_argument("--model", required=True)
    c.add_argument("--train", required=True)
    c.add_argument("--percentile", type=float)
    c.add_argument("--out", help="write the updated checkpoint here (default: in place)")
    c.set_defaults(func=cmd_calibrate)

    d = sub.add_parser("detect", help="score series and write the report CSV")
    fmt(d)
    d.add_argument("--model", required=True)
    d.add_argument("--input", required=True)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_detect)

    v = sub.add_parser("evaluate", help="metrics JSON and ROC CSV from a report and labels")
    v.add_argument("--report", required=True)
    v.add_argument("--labels", required=True)
    v.add_argument("--out-dir", required=True)
    v.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("run", help="train, calibrate, detect and evaluate in one go")
    pipeline_opts(r)
    r.add_argument("--train", required=True)
    r.add_argument("--test", required=True)
    r.add_argument("--labels")
    r.add_argument("--out-dir", required=True)
    r.add_argument("--repetitions", type=int, default=1)
    r.set_defaults(func=cmd_run)

    n = sub.add_parser("render", help="write slice images of one series as PNG")
    pipeline_opts(n)
    fmt(n)
    n.add_argument("--input", required=True)
    n.add_argument("--series", type=int, default=0)
    n.add_argument("--slices", help="comma separated slice indices (default: all)")
    n.add_argument("--train")
    n.add_argument("--model")
    n.add_argument("--out-dir", required=True)
    n.set_defaults(func=cmd_render)

    b = sub.add_parser("bench", help="time the encoding of random slices")
    b.add_argument("--encoder", choices=ENCODERS[1:] + ("all",), default="all")
    b.add_argument("--count", type=int, default=10_000)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"ts2img {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
