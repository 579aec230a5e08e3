from opcap.training.losses import BranchTerms, LossConfig, baseline_loss, combined_loss, regularizers
from opcap.training.schedules import alpha_schedule, lr_schedule
from opcap.training.checkpoint import load_checkpoint, save_checkpoint
from opcap.training.loop import TrainConfig, TrainState, load_train_config, train

__all__ = [
    "LossConfig",
    "BranchTerms",
    "regularizers",
    "baseline_loss",
    "combined_loss",
    "alpha_schedule",
    "lr_schedule",
    "save_checkpoint",
    "load_checkpoint",
    "TrainConfig",
    "TrainState",
    "load_train_config",
    "train",
]
