"""Mini-batch training loop and checkpoint files."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .network import Network
from .optim import AdamState, adam_step

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 200
    seed: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch_size must be positive")


def train(net: Network, data, cfg: TrainConfig = TrainConfig(),
          state: AdamState | None = None, log=None) -> tuple[AdamState, list[float]]:
    """Minimise the MSE reconstruction loss with Adam.

    Runs ``epochs * ceil(n / batch_size)`` steps and returns the optimiser
    state with the per-batch loss history. Batches are reshuffled every
    epoch from ``cfg.seed``.
    """
    x = net._to_batch(data)
    n = len(x)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if state is None:
        state = AdamState(cfg.lr, cfg.beta1, cfg.beta2, cfg.epsilon)
    rng = np.random.default_rng(cfg.seed)
    history = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        for start in range(0, n, cfg.batch_size):
            batch = x[order[start:start + cfg.batch_size]]
            recon, cache = net.forward(batch)
            d = recon - batch
            history.append(float(np.mean(d * d)))
            adam_step(state, net.params, net.backward(batch, recon, cache))
        if log is not None:
            log(f"epoch {epoch + 1}/{cfg.epochs} loss {history[-1]:.6g}")
    return state, history


def save_checkpoint(path, net: Network, state: AdamState | None = None,
                    cfg: TrainConfig | None = None, extra: dict | None = None,
                    meta: dict | None = None) -> Path:
    """Write an ``.npz`` container: JSON header plus little-endian float arrays.

    ``extra`` holds additional named arrays (fitted encoder state, thresholds).
    """
    path = Path(path)
    header = {
        "format": "ts2img-checkpoint",
        "version": CHECKPOINT_VERSION,
        "network": net.spec(),
        "shapes": {k: list(v.shape) for k, v in net.params.items()},
        "train_config": asdict(cfg) if cfg is not None else None,
        "adam": state.hyper() if state is not None else None,
        "extra": sorted((extra or {}).keys()),
        "meta": meta or {},
    }
    arrays = {"header": np.array(json.dumps(header, sort_keys=True))}
    for k, v in net.params.items():
        arrays[f"param/{k}"] = np.asarray(v, dtype="<f8")
    if state is not None:
        for k in state.m:
            arrays[f"adam_m/{k}"] = np.asarray(state.m[k], dtype="<f8")
            arrays[f"adam_v/{k}"] = np.asarray(state.v[k], dtype="<f8")
    for k, v in (extra or {}).items():
        arrays[f"extra/{k}"] = np.asarray(v, dtype="<f8")
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)
    return path


def load_checkpoint(path, dtype=np.float64):
    """Return ``(network, adam_state, train_config, extra, meta)``."""
    with np.load(path, allow_pickle=False) as z:
        header = json.loads(str(z["header"]))
        if header.get("format") != "ts2img-checkpoint":
            raise ValueError(f"{path} is not a ts2img checkpoint")
        if header["version"] > CHECKPOINT_VERSION:
            raise ValueError(f"checkpoint version {header['version']} is newer than supported")
        params = {k[6:]: z[k].astype(dtype) for k in z.files if k.startswith("param/")}
        state = None
        if header["adam"] is not None:
            state = AdamState(**header["adam"])
            state.m = {k[7:]: z[k].astype(dtype) for k in z.files if k.startswith("adam_m/")}
            state.v = {k[7:]: z[k].astype(dtype) for k in z.files if k.startswith("adam_v/")}
        extra = {k[6:]: np.array(z[k]) for k in z.files if k.startswith("extra/")}
    net = Network.from_spec(header["network"], params)
    cfg = TrainConfig(**header["train_config"]) if header["train_config"] else None
    return net, state, cfg, extra, header["meta"]
