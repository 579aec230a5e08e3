"""Epoch-indexed schedules for the task-mix weight and the learning rate."""

from __future__ import annotations

from opcap.training.losses import LossConfig


def alpha_schedule(epoch: int, cfg: LossConfig) -> float:
    """Caption-branch weight for this epoch.

    baseline -> 1.0 (the auxiliary branch never contributes);
    linear_int -> the fixed alpha;
    alternative -> alpha_low for the first period_epochs epochs (the
    scene-graph-heavy phase comes first), then alpha_high, alternating.
    """
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    if cfg.alpha_mode == "baseline":
        return 1.0
    if cfg.alpha_mode == "linear_int":
        return cfg.alpha
    phase = (epoch // cfg.period_epochs) % 2
    return cfg.alpha_low if phase == 0 else cfg.alpha_high


def lr_schedule(epoch: int, base: float = 0.01, factor: float = 0.1, step_epochs: int = 20) -> float:
    """Step decay: base * factor^(epoch // step_epochs)."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return base * factor ** (epoch // step_epochs)
