"""
Turning a vibration slice into images
=====================================

Every encoder maps one 512-sample slice to a 64x64 image. Some of them
need statistics of the healthy training data first.
"""
import sys
from pathlib import Path

import numpy as np

from ts2img.encoders import ENCODERS, Encoder
from ts2img.pipeline import render
from ts2img.synthetic import SyntheticSpec, generate_synthetic

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_images")

# a small synthetic set: multi-tone signals plus noise
ds = generate_synthetic(SyntheticSpec(n_train=20, n_test_healthy=2, n_test_anomalous=2), seed=1)
series = ds.test[np.argmax(ds.labels)]
print("first anomalous test series:", ds.kinds[np.argmax(ds.labels)])

###############################################################################
# Fit the encoders that depend on training data (GAF bounds, SAX bins and the
# transition matrix for MTF, bounds for GS), then encode the whole series.

for name in ENCODERS[1:]:
    enc = Encoder(name)
    if enc.needs_fit:
        enc.fit(ds.train)
    images = enc.encode(series)
    print(f"{name:13s} {images.shape}  range [{images.min():9.3f}, {images.max():9.3f}]")

###############################################################################
# PNG files use a min-max stretch per image, named series_slice_encoder.png.

paths = render(Encoder("sc"), series, out, "anomalous", slices=[0, 1, 2])
paths += render(Encoder("rp-original"), series, out, "anomalous", slices=[0])
print("wrote", ", ".join(p.name for p in paths), "to", out)
