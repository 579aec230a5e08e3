"""Loss assembly: caption branch, auxiliary branch, and their mixing.

The single-task objective is
    L = L_cap + lambda_l1 * L1 - lambda_ent * L_ent
(the entropy of the stream-attention weights is rewarded, discouraging an
early collapse onto one stream). The multi-task objective mixes the caption
branch and the scene-graph branch with weight alpha:
    L = alpha * branch_cap + (1 - alpha) * branch_sgr
where each branch applies the same regularizer weights to its own terms.
Both branches share the spatial-attention L1 (the auxiliary head consumes
the same spatial maps); each has its own stream-attention entropy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import torch

ALPHA_MODES = ("baseline", "linear_int", "alternative")
SG_MODES = ("all", "diff")

Scalar = Union[float, torch.Tensor]


@dataclass
class LossConfig:
    lambda_l1: float = 2.5e-3
    lambda_ent: float = 1e-4
    alpha_mode: str = "baseline"
    alpha: float = 0.9  # linear_int
    alpha_low: float = 0.1  # alternative, first phase
    alpha_high: float = 0.9
    period_epochs: int = 10
    sg_mode: str = "all"

    def __post_init__(self):
        if self.lambda_l1 < 0 or self.lambda_ent < 0:
            raise ValueError("regularizer weights must be >= 0")
        if self.alpha_mode not in ALPHA_MODES:
            raise ValueError(f"alpha_mode must be one of {ALPHA_MODES}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not (0.0 <= self.alpha_low <= self.alpha_high <= 1.0):
            raise ValueError("need 0 <= alpha_low <= alpha_high <= 1")
        if self.period_epochs < 1:
            raise ValueError("period_epochs must be >= 1")
        if self.sg_mode not in SG_MODES:
            raise ValueError(f"sg_mode must be one of {SG_MODES}")


class BranchTerms(NamedTuple):
    """Task loss plus its regularizer values (not yet weighted)."""

    loss: Scalar
    l1: Scalar
    ent: Scalar


def regularizers(
    attn_a: torch.Tensor,
    attn_b: torch.Tensor,
    dyn_weights: torch.Tensor,
    step_mask: Optional[torch.Tensor] = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """(L1, L_ent): mean |spatial attention| and mean stream-weight entropy.

    dyn_weights is (..., steps, 3); step_mask (..., steps) restricts the
    entropy mean to real (non-PAD) decoding steps.
    """
    l1 = (attn_a.abs().mean() + attn_b.abs().mean()) / 2
    ent = -(dyn_weights * torch.log(dyn_weights.clamp_min(1e-12))).sum(dim=-1)
    if step_mask is not None:
        ent = (ent * step_mask).sum() / step_mask.sum().clamp_min(1)
    else:
        ent = ent.mean()
    return l1, ent


def _branch(terms: BranchTerms, cfg: LossConfig) -> Scalar:
    return terms.loss + cfg.lambda_l1 * terms.l1 - cfg.lambda_ent * terms.ent


def baseline_loss(cap_terms: BranchTerms, cfg: LossConfig) -> Scalar:
    """Caption-only objective."""
    return _branch(cap_terms, cfg)


def combined_loss(cap_terms: BranchTerms, sgr_terms: BranchTerms, alpha: float, cfg: LossConfig) -> Scalar:
    """Convex mix of the caption and scene-graph branches."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha * _branch(cap_terms, cfg) + (1.0 - alpha) * _branch(sgr_terms, cfg)
