from .layers import AvgPool, Conv, ConvTranspose, Dense, Fold, Unfold, Upsample, leaky_relu
from .network import Arch1D, Arch2D, Network, build_network, mse
from .optim import AdamState, adam_step
from .training import TrainConfig, load_checkpoint, save_checkpoint, train

__all__ = [
    "AvgPool", "Conv", "ConvTranspose", "Dense", "Fold", "Unfold", "Upsample", "leaky_relu",
    "Arch1D", "Arch2D", "Network", "build_network", "mse",
    "AdamState", "adam_step", "TrainConfig", "load_checkpoint", "save_checkpoint", "train",
]
