"""Sequential auto-encoders built from :mod:`.layers`, with MSE loss."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import (
    LEAKY_ALPHA, AvgPool, Conv, ConvTranspose, Dense, Fold, Layer, Unfold, Upsample,
    layer_from_spec,
)


class Network:
    """A chain of layers plus a flat parameter dict ``{"<index>.<name>": array}``."""

    def __init__(self, layers: list[Layer], input_shape: tuple, arch: str = "custom",
                 params: dict[str, np.ndarray] | None = None):
        self.layers = list(layers)
        self.input_shape = tuple(input_shape)
        self.arch = arch
        self.shapes = self.infer_shapes()
        self.params = params if params is not None else {}

    def infer_shapes(self) -> list[tuple]:
        """Shape after each layer (batch dimension omitted), input first."""
        shapes = [self.input_shape]
        for layer in self.layers:
            shapes.append(tuple(layer.output_shape(shapes[-1])))
        if shapes[-1] != self.input_shape:
            raise ValueError(f"network maps {self.input_shape} to {shapes[-1]}")
        return shapes

    def initialize(self, seed: int = 0, dtype=np.float64) -> "Network":
        rng = np.random.default_rng(seed)
        self.params = {}
        for i, layer in enumerate(self.layers):
            for name, value in layer.init(rng, dtype).items():
                self.params[f"{i}.{name}"] = value
        return self

    def layer_params(self, i: int) -> dict[str, np.ndarray]:
        prefix = f"{i}."
        return {k[len(prefix):]: v for k, v in self.params.items() if k.startswith(prefix)}

    @property
    def dtype(self):
        for v in self.params.values():
            return v.dtype
        return np.dtype(np.float64)

    def _to_batch(self, x):
        """Accept ``(n, *input_shape)``, a single unbatched input, or a batch
        missing singleton axes (e.g. ``(n, 64, 64)`` images, ``(n, 512)`` slices)."""
        x = np.asarray(x, dtype=self.dtype)
        if x.shape == self.input_shape:
            return x[None]
        if x.ndim >= 1 and x[:1].size == int(np.prod(self.input_shape)):
            return x.reshape((x.shape[0],) + self.input_shape)
        raise ValueError(f"input of shape {x.shape} does not match network input {self.input_shape}")

    def forward(self, x):
        """Return ``(reconstruction, cache)``; the reconstruction is batched, ``(n, *input_shape)``."""
        h = self._to_batch(x)
        caches = []
        for i, layer in enumerate(self.layers):
            h, c = layer.forward(self.layer_params(i), h)
            caches.append(c)
        return h, caches

    def reconstruct(self, x, batch_size: int = 256) -> np.ndarray:
        """Reconstruction in the caller's shape, computed in batches."""
        xb = self._to_batch(x)
        out = [self.forward(xb[i:i + batch_size])[0] for i in range(0, len(xb), batch_size)]
        return np.concatenate(out).reshape(np.shape(x))

    def backward(self, x, reconstruction, cache) -> dict[str, np.ndarray]:
        """Gradient of the mean squared reconstruction error w.r.t. every parameter."""
        target = self._to_batch(x)
        dy = 2.0 * (reconstruction - target) / reconstruction.size
        grads = {}
        for i in range(len(self.layers) - 1, -1, -1):
            dy, g = self.layers[i].backward(self.layer_params(i), cache[i], dy)
            for name, value in g.items():
                grads[f"{i}.{name}"] = value
        return grads

    def loss(self, x) -> float:
        y, _ = self.forward(x)
        return mse(y, self._to_batch(x))

    def spec(self) -> dict:
        return {"arch": self.arch, "input_shape": list(self.input_shape),
                "layers": [layer.spec() for layer in self.layers]}

    @classmethod
    def from_spec(cls, spec: dict, params=None) -> "Network":
        return cls([layer_from_spec(s) for s in spec["layers"]],
                   tuple(spec["input_shape"]), spec.get("arch", "custom"), params)

    def describe(self) -> list[tuple[str, tuple]]:
        rows = [("input", self.shapes[0])]
        for layer, shape in zip(self.layers, self.shapes[1:]):
            rows.append((layer.kind, shape))
        return rows


def mse(y, target) -> float:
    d = np.asarray(y) - np.asarray(target)
    return float(np.mean(d * d))


@dataclass(frozen=True)
class Arch2D:
    image_size: int = 64
    channels: tuple[int, ...] = (64, 128)
    kernel: int = 2
    stride: int = 2
    bottleneck: int = 300
    alpha: float = LEAKY_ALPHA


@dataclass(frozen=True)
class Arch1D:
    length: int = 512
    channels: tuple[int, ...] = (64, 128, 256)
    kernels: tuple[int, ...] = (16, 8, 4)
    strides: tuple[int, ...] = (4, 2, 2)
    pool: int = 2
    bottleneck: int = 300
    alpha: float = LEAKY_ALPHA


def _mirror(encoder: list[tuple[Layer, tuple]], alpha) -> list[Layer]:
    """Decoder layers undoing ``encoder`` (pairs of layer and its input shape)."""
    decoder = []
    for k, (layer, in_shape) in enumerate(reversed(encoder)):
        last = k == len(encoder) - 1
        if isinstance(layer, Conv):
            decoder.append(ConvTranspose(layer.cout, layer.cin, layer.kernel, layer.stride,
                                         in_shape[:2], "linear" if last else "leaky", alpha))
        elif isinstance(layer, AvgPool):
            decoder.append(Upsample(layer.size))
        else:
            raise TypeError(f"cannot mirror {layer.kind}")
    return decoder


def _assemble(encoder_layers, input_shape, bottleneck, alpha, arch) -> Network:
    shapes = [tuple(input_shape)]
    for layer in encoder_layers:
        shapes.append(layer.output_shape(shapes[-1]))
    flat = int(np.prod(shapes[-1]))
    layers = list(encoder_layers) + [
        Unfold(),
        Dense(flat, bottleneck, "leaky", alpha),
        Dense(bottleneck, flat, "leaky", alpha),
        Fold(shapes[-1]),
    ]
    layers += _mirror(list(zip(encoder_layers, shapes[:-1])), alpha)
    return Network(layers, input_shape, arch)


def build_network(arch: str = "2d", seed: int | None = 0, dtype=np.float64, **overrides) -> Network:
    """Build the 2-D image or 1-D raw-signal auto-encoder.

    With default settings the encoder shapes are::

        2d: 64x64x1 -> 32x32x64 -> 16x16x128 -> 32768 -> 300
        1d: 1x512x1 -> 1x128x64 -> 1x64x64 -> 1x32x128 -> 1x16x128
            -> 1x8x256 -> 1x4x256 -> 1024 -> 300

    and the decoder mirrors them back to the input shape. Keyword overrides
    go to :class:`Arch2D` / :class:`Arch1D` (e.g. narrower ``channels``).
    Pass ``seed=None`` to skip weight allocation.
    """
    if arch == "2d":
        a = Arch2D(**overrides)
        enc, cin = [], 1
        for c in a.channels:
            enc.append(Conv(cin, c, a.kernel, a.stride, "leaky", a.alpha))
            cin = c
        net = _assemble(enc, (a.image_size, a.image_size, 1), a.bottleneck, a.alpha, "2d")
    elif arch == "1d":
        a = Arch1D(**overrides)
        enc, cin = [], 1
        for c, k, s in zip(a.channels, a.kernels, a.strides):
            enc.append(Conv(cin, c, (1, k), (1, s), "leaky", a.alpha))
            enc.append(AvgPool((1, a.pool)))
            cin = c
        net = _assemble(enc, (1, a.length, 1), a.bottleneck, a.alpha, "1d")
    else:
        raise ValueError(f"unknown architecture {arch!r}; use '1d' or '2d'")
    if seed is not None:
        net.initialize(seed, dtype)
    return net
