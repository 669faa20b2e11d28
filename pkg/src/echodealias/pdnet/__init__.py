"""Unfolded primal-dual dealiasing network with a self-contained
numpy training stack (hand-derived reverse-mode gradients, cross-entropy
plus soft-Dice loss, ADAM with cosine annealing)."""

from .network import (
    ConvStack,
    ForwardResult,
    PDNetModel,
    backward,
    forward,
    init_model,
    parameter_count,
    predict,
    wrap_unit,
)
from .losses import ce_dice_loss, ce_dice_loss_and_grad, per_sample_losses
from .train import Adam, TrainConfig, TrainResult, cosine_lr, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Adam",
    "ConvStack",
    "ForwardResult",
    "PDNetModel",
    "TrainConfig",
    "TrainResult",
    "backward",
    "ce_dice_loss",
    "ce_dice_loss_and_grad",
    "cosine_lr",
    "forward",
    "init_model",
    "load_checkpoint",
    "parameter_count",
    "per_sample_losses",
    "predict",
    "save_checkpoint",
    "train",
    "wrap_unit",
]
