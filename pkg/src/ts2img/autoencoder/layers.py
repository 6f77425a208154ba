"""Differentiable layers on channels-last tensors ``(batch, rows, cols, channels)``.

One-dimensional signals are carried as single-row images, ``(batch, 1, L, C)``,
so every convolution here is a 2-D one with a possibly flat kernel. Each layer
is stateless apart from its hyper-parameters: weights live in a dict owned by
the network, and ``forward`` returns a cache that ``backward`` consumes.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

LEAKY_ALPHA = 0.3


def _pair(v) -> tuple[int, int]:
    return (int(v), int(v)) if np.isscalar(v) else (int(v[0]), int(v[1]))


def same_padding(size: int, kernel: int, stride: int) -> tuple[int, int, int]:
    """``(out, pad_before, pad_after)`` for TF-style 'same' padding."""
    out = -(-size // stride)
    total = max((out - 1) * stride + kernel - size, 0)
    return out, total // 2, total - total // 2


def leaky_relu(z, alpha=LEAKY_ALPHA):
    # max(z, alpha*z) equals the leaky ReLU for 0 <= alpha <= 1
    y = alpha * z
    return np.maximum(y, z, out=y)



def leaky_relu_grad(z, alpha=LEAKY_ALPHA):
    return np.where(z > 0, 1.0, alpha)


def _tiled(kernel, stride, h, w) -> bool:
    """Kernel == stride and the input divides evenly: windows tile the input exactly."""
    return kernel == stride and h % kernel[0] == 0 and w % kernel[1] == 0


class Layer:
    kind = "layer"
    activation = "linear"

    def init(self, rng, dtype=np.float64) -> dict[str, np.ndarray]:
        return {}

    def output_shape(self, shape: tuple) -> tuple:
        raise NotImplementedError

    def forward(self, p, x):
        raise NotImplementedError

    def backward(self, p, cache, dy):
        raise NotImplementedError

    def spec(self) -> dict:
        return {"kind": self.kind}

    # activation helpers shared by parametrised layers
    def _activate(self, z):
        return leaky_relu(z, self.alpha) if self.activation == "leaky" else z

    def _activation_grad(self, z, dy):
        if self.activation != "leaky":
            return dy
        slope = np.greater(z, 0).astype(dy.dtype)
        slope *= 1.0 - self.alpha
        slope += self.alpha
        slope *= dy
        return slope


def _check_activation(act):
    if act not in ("leaky", "linear"):
        raise ValueError(f"unknown activation {act!r}")
    return act


class Conv(Layer):
    """Strided convolution with 'same' padding: out = ceil(in / stride)."""

    kind = "conv"

    def __init__(self, cin, cout, kernel, stride, activation="leaky", alpha=LEAKY_ALPHA):
        self.cin, self.cout = int(cin), int(cout)
        self.kernel, self.stride = _pair(kernel), _pair(stride)
        self.activation = _check_activation(activation)
        self.alpha = alpha

    def spec(self):
        return {"kind": self.kind, "cin": self.cin, "cout": self.cout,
                "kernel": list(self.kernel), "stride": list(self.stride),
                "activation": self.activation, "alpha": self.alpha}

    def init(self, rng, dtype=np.float64):
        kh, kw = self.kernel
        limit = np.sqrt(6.0 / (kh * kw * self.cin))
        return {"weight": rng.uniform(-limit, limit, (kh, kw, self.cin, self.cout)).astype(dtype),
                "bias": np.zeros(self.cout, dtype=dtype)}

    def _geometry(self, h, w):
        (kh, kw), (sh, sw) = self.kernel, self.stride
        return same_padding(h, kh, sh), same_padding(w, kw, sw)

    def output_shape(self, shape):
        h, w, c = shape
        if c != self.cin:
            raise ValueError(f"conv expects {self.cin} channels, got {c}")
        (ho, _, _), (wo, _, _) = self._geometry(h, w)
        return (ho, wo, self.cout)

    def forward(self, p, x):
        n, h, w, c = x.shape
        (kh, kw), (sh, sw) = self.kernel, self.stride
        (ho, pt, pb), (wo, pl, pr) = self._geometry(h, w)
        if _tiled(self.kernel, self.stride, h, w):
            cols = x.reshape(n, ho, kh, wo, kw, c).transpose(0, 1, 3, 2, 4, 5)
            cols = cols.reshape(n * ho * wo, kh * kw * c)
            z = (cols @ p["weight"].reshape(-1, self.cout) + p["bias"]).reshape(n, ho, wo, -1)
            return self._activate(z), (cols, z, x.shape, (0, 0), (h, w))
        xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0))) if pt + pb + pl + pr else x
        win = sliding_window_view(xp, (kh, kw), axis=(1, 2))[:, ::sh, ::sw][:, :ho, :wo]
        # win: (n, ho, wo, c, kh, kw) -> columns ordered (kh, kw, c) like the weight
        cols = win.transpose(0, 1, 2, 4, 5, 3).reshape(n * ho * wo, kh * kw * c)
        z = cols @ p["weight"].reshape(-1, self.cout) + p["bias"]
        z = z.reshape(n, ho, wo, self.cout)
        return self._activate(z), (cols, z, xp.shape, (pt, pl), (h, w))

    def backward(self, p, cache, dy):
        cols, z, padded_shape, (pt, pl), (h, w) = cache
        (kh, kw), (sh, sw) = self.kernel, self.stride
        n, ho, wo, _ = z.shape
        dz = self._activation_grad(z, dy).reshape(-1, self.cout)
        grads = {"weight": (cols.T @ dz).reshape(p["weight"].shape), "bias": dz.sum(axis=0)}
        dcols = (dz @ p["weight"].reshape(-1, self.cout).T).reshape(n, ho, wo, kh, kw, self.cin)
        if _tiled(self.kernel, self.stride, h, w):
            return dcols.transpose(0, 1, 3, 2, 4, 5).reshape(n, h, w, self.cin), grads
        dxp = np.zeros(padded_shape, dtype=dy.dtype)
        for i in range(kh):
            for j in range(kw):
                dxp[:, i:i + sh * ho:sh, j:j + sw * wo:sw, :] += dcols[:, :, :, i, j, :]
        return dxp[:, pt:pt + h, pl:pl + w, :], grads


class ConvTranspose(Layer):
    """Adjoint of :class:`Conv` with the output size pinned to ``out_size``.

    Used to mirror an encoder convolution: ``out_size`` is that convolution's
    input size, so shapes are restored exactly.
    """

    kind = "conv_transpose"

    def __init__(self, cin, cout, kernel, stride, out_size, activation="leaky",
                 alpha=LEAKY_ALPHA):
        self.cin, self.cout = int(cin), int(cout)
        self.kernel, self.stride = _pair(kernel), _pair(stride)
        self.out_size = _pair(out_size)
        self.activation = _check_activation(activation)
        self.alpha = alpha

    def spec(self):
        return {"kind": self.kind, "cin": self.cin, "cout": self.cout,
                "kernel": list(self.kernel), "stride": list(self.stride),
                "out_size": list(self.out_size), "activation": self.activation,
                "alpha": self.alpha}

    def init(self, rng, dtype=np.float64):
        kh, kw = self.kernel
        limit = np.sqrt(6.0 / (kh * kw * self.cin))
        return {"weight": rng.uniform(-limit, limit, (kh, kw, self.cin, self.cout)).astype(dtype),
                "bias": np.zeros(self.cout, dtype=dtype)}

    def _geometry(self, h, w):
        (kh, kw), (sh, sw) = self.kernel, self.stride
        (th, tw) = self.out_size
        oh, pt, pb = same_padding(th, kh, sh)
        ow, pl, pr = same_padding(tw, kw, sw)
        if (oh, ow) != (h, w):
            raise ValueError(
                f"transposed conv to {self.out_size} expects input {(oh, ow)}, got {(h, w)}"
            )
        buf = (max(th + pt + pb, (h - 1) * sh + kh), max(tw + pl + pr, (w - 1) * sw + kw))
        return buf, (pt, pl)

    def output_shape(self, shape):
        h, w, c = shape
        if c != self.cin:
            raise ValueError(f"transposed conv expects {self.cin} channels, got {c}")
        self._geometry(h, w)
        return (*self.out_size, self.cout)

    def forward(self, p, x):
        n, h, w, _ = x.shape
        (kh, kw), (sh, sw) = self.kernel, self.stride
        (bh, bw), (pt, pl) = self._geometry(h, w)
        th, tw = self.out_size
        # (n*h*w, cin) @ (cin, kh*kw*cout)
        wmat = p["weight"].transpose(2, 0, 1, 3).reshape(self.cin, -1)
        contrib = (x.reshape(-1, self.cin) @ wmat).reshape(n, h, w, kh, kw, self.cout)
        if _tiled(self.kernel, self.stride, th, tw):
            z = contrib.transpose(0, 1, 3, 2, 4, 5).reshape(n, th, tw, self.cout) + p["bias"]
            return self._activate(z), (x, z, (th, tw), (0, 0))
        buf = np.zeros((n, bh, bw, self.cout), dtype=x.dtype)
        for i in range(kh):
            for j in range(kw):
                buf[:, i:i + sh * h:sh, j:j + sw * w:sw, :] += contrib[:, :, :, i, j, :]
        z = buf[:, pt:pt + th, pl:pl + tw, :] + p["bias"]
        return self._activate(z), (x, z, (bh, bw), (pt, pl))

    def backward(self, p, cache, dy):
        x, z, (bh, bw), (pt, pl) = cache
        n, h, w, _ = x.shape
        (kh, kw), (sh, sw) = self.kernel, self.stride
        th, tw = self.out_size
        dz = self._activation_grad(z, dy)
        if _tiled(self.kernel, self.stride, th, tw):
            dcontrib = dz.reshape(n, h, kh, w, kw, self.cout).transpose(0, 1, 3, 2, 4, 5)
            dcontrib = dcontrib.reshape(n * h * w, -1)
        else:
            dbuf = np.zeros((n, bh, bw, self.cout), dtype=dy.dtype)
            dbuf[:, pt:pt + th, pl:pl + tw, :] = dz
            win = sliding_window_view(dbuf, (kh, kw), axis=(1, 2))[:, ::sh, ::sw][:, :h, :w]
            # (n, h, w, cout, kh, kw) -> (n*h*w, kh*kw*cout) matching wmat's column order
            dcontrib = win.transpose(0, 1, 2, 4, 5, 3).reshape(n * h * w, -1)
        wmat = p["weight"].transpose(2, 0, 1, 3).reshape(self.cin, -1)
        dx = (dcontrib @ wmat.T).reshape(x.shape)
        dw = (x.reshape(-1, self.cin).T @ dcontrib).reshape(self.cin, kh, kw, self.cout)
        return dx, {"weight": dw.transpose(1, 2, 0, 3), "bias": dz.sum(axis=(0, 1, 2))}


class AvgPool(Layer):
    """Non-overlapping average pooling (kernel == stride)."""

    kind = "pool"

    def __init__(self, size):
        self.size = _pair(size)

    def spec(self):
        return {"kind": self.kind, "size": list(self.size)}

    def output_shape(self, shape):
        h, w, c = shape
        fh, fw = self.size
        if h % fh or w % fw:
            raise ValueError(f"pool {self.size} does not divide {(h, w)}")
        return (h // fh, w // fw, c)

    def forward(self, p, x):
        n, h, w, c = x.shape
        fh, fw = self.size
        return x.reshape(n, h // fh, fh, w // fw, fw, c).mean(axis=(2, 4)), x.shape

    def backward(self, p, cache, dy):
        fh, fw = self.size
        dx = np.repeat(np.repeat(dy, fh, axis=1), fw, axis=2) / (fh * fw)
        return dx, {}


class Upsample(Layer):
    """Nearest-neighbour upsampling; the decoder mirror of :class:`AvgPool`."""

    kind = "upsample"

    def __init__(self, size):
        self.size = _pair(size)

    def spec(self):
        return {"kind": self.kind, "size": list(self.size)}

    def output_shape(self, shape):
        h, w, c = shape
        return (h * self.size[0], w * self.size[1], c)

    def forward(self, p, x):
        fh, fw = self.size
        return np.repeat(np.repeat(x, fh, axis=1), fw, axis=2), None

    def backward(self, p, cache, dy):
        n, h, w, c = dy.shape
        fh, fw = self.size
        return dy.reshape(n, h // fh, fh, w // fw, fw, c).sum(axis=(2, 4)), {}


class Unfold(Layer):
    kind = "unfold"

    def output_shape(self, shape):
        return (int(np.prod(shape)),)

    def forward(self, p, x):
        return x.reshape(x.shape[0], -1), x.shape

    def backward(self, p, cache, dy):
        return dy.reshape(cache), {}


class Fold(Layer):
    """Inverse of :class:`Unfold`: vector -> ``(rows, cols, channels)``."""

    kind = "fold"

    def __init__(self, shape):
        self.shape = tuple(int(s) for s in shape)

    def spec(self):
        return {"kind": self.kind, "shape": list(self.shape)}

    def output_shape(self, shape):
        if shape != (int(np.prod(self.shape)),):
            raise ValueError(f"cannot fold {shape} into {self.shape}")
        return self.shape

    def forward(self, p, x):
        return x.reshape((x.shape[0],) + self.shape), None

    def backward(self, p, cache, dy):
        return dy.reshape(dy.shape[0], -1), {}


class Dense(Layer):
    kind = "dense"

    def __init__(self, nin, nout, activation="leaky", alpha=LEAKY_ALPHA):
        self.nin, self.nout = int(nin), int(nout)
        self.activation = _check_activation(activation)
        self.alpha = alpha

    def spec(self):
        return {"kind": self.kind, "nin": self.nin, "nout": self.nout,
                "activation": self.activation, "alpha": self.alpha}

    def init(self, rng, dtype=np.float64):
        limit = np.sqrt(6.0 / self.nin)
        return {"weight": rng.uniform(-limit, limit, (self.nin, self.nout)).astype(dtype),
                "bias": np.zeros(self.nout, dtype=dtype)}

    def output_shape(self, shape):
        if shape != (self.nin,):
            raise ValueError(f"dense expects ({self.nin},), got {shape}")
        return (self.nout,)

    def forward(self, p, x):
        z = x @ p["weight"] + p["bias"]
        return self._activate(z), (x, z)

    def backward(self, p, cache, dy):
        x, z = cache
        dz = self._activation_grad(z, dy)
        return dz @ p["weight"].T, {"weight": x.T @ dz, "bias": dz.sum(axis=0)}


LAYER_TYPES = {cls.kind: cls for cls in (Conv, ConvTranspose, AvgPool, Upsample, Unfold, Fold, Dense)}


def layer_from_spec(spec: dict) -> Layer:
    spec = dict(spec)
    cls = LAYER_TYPES[spec.pop("kind")]
    return cls(**spec)
