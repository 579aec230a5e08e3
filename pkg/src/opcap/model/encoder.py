"""Image-pair encoding: feature maps, difference, dual spatial attention.

The desk-scale encoder is a small trainable conv stack with the same output
contract as a frozen backbone; precomputed feature maps can be fed directly
(ModelConfig.precomputed_features) to reproduce a fixed-backbone setting.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn

from opcap.model.config import ModelConfig

PROVENANCES = ("image_a", "image_b", "difference")


@dataclass
class FeatureMap:
    """(..., C, H', W') activations tagged with where they came from."""

    values: torch.Tensor
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")
        if self.values.dim() < 3:
            raise ValueError("feature map needs at least (C, H, W) dims")


@dataclass
class AttentionMap:
    """(..., H', W') weights in [0, 1]."""

    weights: torch.Tensor

    def __post_init__(self):
        if not torch.isfinite(self.weights).all():
            raise ValueError("attention weights must be finite")
        if self.weights.min() < 0 or self.weights.max() > 1:
            raise ValueError("attention weights must lie in [0, 1]")


@dataclass
class FeatureBundle:
    """Attended vectors for both states and their difference, plus sources."""

    l_a: torch.Tensor  # (..., C)
    l_b: torch.Tensor
    l_diff: torch.Tensor
    x_a: torch.Tensor  # (..., C, H', W')
    x_b: torch.Tensor
    x_diff: torch.Tensor
    a_a: torch.Tensor  # (..., H', W')
    a_b: torch.Tensor

    def streams(self) -> torch.Tensor:
        """Stack (..., 3, C) in (A, B, diff) order."""
        return torch.stack([self.l_a, self.l_b, self.l_diff], dim=-2)


class ImageEncoder(nn.Module):
    """Conv stack mapping (B, 3, S, S) images to (B, C, H', W') features.

    Each stage halves the spatial side; channel widths double up to C.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        if cfg.precomputed_features:
            self.stack = None
            return
        stages = cfg.num_stages
        widths = [max(8, cfg.channels >> (stages - 1 - i)) for i in range(stages)]
        widths[-1] = cfg.channels
        layers: list[nn.Module] = []
        in_ch = 3
        for w in widths:
            layers += [nn.Conv2d(in_ch, w, 3, padding=1), nn.ReLU(), nn.MaxPool2d(2)]
            in_ch = w
        self.stack = nn.Sequential(*layers)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        c, hw = self.cfg.channels, self.cfg.feat_hw
        if self.cfg.precomputed_features:
            if images.shape[-3:] != (c, hw, hw):
                raise ValueError(f"precomputed features must be (..., {c}, {hw}, {hw}), got {tuple(images.shape)}")
            return images
        if images.shape[-2:] != (self.cfg.image_size, self.cfg.image_size) or images.shape[-3] != 3:
            raise ValueError(
                f"expected (..., 3, {self.cfg.image_size}, {self.cfg.image_size}) input, got {tuple(images.shape)}"
            )
        return self.stack(images)

    def encode_image(self, image: torch.Tensor, provenance: str) -> FeatureMap:
        squeeze = image.dim() == 3
        x = self.forward(image.unsqueeze(0) if squeeze else image)
        return FeatureMap(x.squeeze(0) if squeeze else x, provenance)

    def freeze(self) -> None:
        for p in self.parameters():
            p.requires_grad_(False)

    def unfreeze(self) -> None:
        for p in self.parameters():
            p.requires_grad_(True)


def compute_difference(x_a: FeatureMap, x_b: FeatureMap) -> FeatureMap:
    """Elementwise current-minus-target feature difference."""
    if x_a.values.shape != x_b.values.shape:
        raise ValueError(f"shape mismatch: {tuple(x_a.values.shape)} vs {tuple(x_b.values.shape)}")
    return FeatureMap(x_a.values - x_b.values, "difference")


class SpatialAttention(nn.Module):
    """Per-location gate over [X; X_diff], shared between both states.

    1x1 convs keep the map strictly local; the logistic squash bounds every
    weight to [0, 1] independently (weights are not normalized across space).
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.proj = nn.Sequential(
            nn.Conv2d(2 * cfg.channels, cfg.attn_hidden, 1),
            nn.ReLU(),
            nn.Conv2d(cfg.attn_hidden, 1, 1),
        )

    def forward(self, x: torch.Tensor, x_diff: torch.Tensor) -> torch.Tensor:
        if x.shape != x_diff.shape:
            raise ValueError(f"shape mismatch: {tuple(x.shape)} vs {tuple(x_diff.shape)}")
        logits = self.proj(torch.cat([x, x_diff], dim=-3))
        return torch.sigmoid(logits).squeeze(-3)


def attended_feature(x: torch.Tensor, a: torch.Tensor) -> torch.Tensor:
    """Spatial sum of a(h, w) * x(c, h, w) -> (..., C)."""
    if x.shape[-2:] != a.shape[-2:]:
        raise ValueError(f"spatial mismatch: {tuple(x.shape)} vs {tuple(a.shape)}")
    return (x * a.unsqueeze(-3)).sum(dim=(-2, -1))


def build_bundle(encoder: ImageEncoder, attention: SpatialAttention,
                 img_a: torch.Tensor, img_b: torch.Tensor) -> FeatureBundle:
    """Full encoding pipeline for a batch of image pairs."""
    x_a = encoder(img_a)
    x_b = encoder(img_b)
    x_diff = x_a - x_b
    a_a = attention(x_a, x_diff)
    a_b = attention(x_b, x_diff)
    return FeatureBundle(
        l_a=attended_feature(x_a, a_a),
        l_b=attended_feature(x_b, a_b),
        l_diff=attended_feature(x_diff, torch.maximum(a_a, a_b)),
        x_a=x_a, x_b=x_b, x_diff=x_diff, a_a=a_a, a_b=a_b,
    )
