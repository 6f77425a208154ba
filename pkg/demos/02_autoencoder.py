"""
The convolutional auto-encoder
==============================

Two architectures: a 1-D network for raw slices and a 2-D network for
64x64 images. Both squeeze their input through a 300-unit bottleneck.
"""
import numpy as np

from ts2img.autoencoder import TrainConfig, build_network, train

for arch in ("1d", "2d"):
    net = build_network(arch, seed=None)  # shapes only, no weights allocated
    print(arch)
    for kind, shape in net.describe():
        print(f"  {kind:15s} {'x'.join(map(str, shape))}")

###############################################################################
# A narrow 2-D network trained for a few epochs on smooth product patterns.
# The loss falls to about a third of its starting value.

rng = np.random.default_rng(0)
u = np.linspace(0, 1, 64)
freq = rng.uniform(1, 3, size=(300, 2))
images = np.sin(2 * np.pi * freq[:, 0, None, None] * u[None, :, None]) \
    * np.cos(2 * np.pi * freq[:, 1, None, None] * u[None, None, :])

net = build_network("2d", seed=0, channels=(8, 16), bottleneck=32)
state, history = train(net, images, TrainConfig(epochs=5, batch_size=20, lr=0.003))
print(f"loss: first step {history[0]:.4f}, last step {history[-1]:.4f}")

recon = net.reconstruct(images[:3])
print("mean absolute error per image:", np.abs(recon - images[:3]).mean(axis=(1, 2)).round(4))
