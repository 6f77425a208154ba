"""
Detecting anomalous series
==========================

Train on healthy series only, set the threshold at the 99th percentile of
the healthy slice residuals, and flag a test series when any of its slices
exceeds it.
"""
import numpy as np

from ts2img.metrics import roc_auc
from ts2img.pipeline import PipelineConfig, run_pipeline
from ts2img.synthetic import SyntheticSpec, energy_detector, generate_synthetic

ds = generate_synthetic(SyntheticSpec(), seed=0)
print(f"{len(ds.train)} healthy training series, {len(ds.test)} test series "
      f"({ds.labels.sum()} anomalous)")

###############################################################################
# A model-free baseline first: the largest short-window energy. It finds the
# spikes and bursts but cannot see a frequency shift.

energy = energy_detector(ds.test)
for kind in ("burst", "shift", "spike"):
    keep = np.array([k in ("", kind) for k in ds.kinds])
    print(f"energy detector AUC on {kind:5s}: {roc_auc(energy[keep], ds.labels[keep]).auc:.3f}")

###############################################################################
# The scalogram pipeline with a narrow network (about a minute on one core).

cfg = PipelineConfig(encoder="sc", channels=(16, 32), bottleneck=64, epochs=10)
res = run_pipeline(cfg, ds.train, ds.test, ds.labels)
m = res.metrics
print(f"threshold {res.report.threshold.value:.2f}")
print(f"TPR {m['tpr']:.2f}  FPR {m['fpr']:.2f}  F1 {m['f1']:.2f}  AUC {m['auc']:.3f}")

scores = res.report.max_residuals
for kind in ("burst", "shift", "spike"):
    keep = np.array([k in ("", kind) for k in ds.kinds])
    print(f"scalogram AUC on {kind:5s}: {roc_auc(scores[keep], ds.labels[keep]).auc:.3f}")
