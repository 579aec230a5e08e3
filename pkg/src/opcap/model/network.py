"""Composite network: shared encoder, caption decoder, auxiliary head."""

from __future__ import annotations

import torch
import torch.nn as nn

from opcap.model.config import ModelConfig
from opcap.model.decoder import CaptionDecoder
from opcap.model.encoder import FeatureBundle, ImageEncoder, SpatialAttention, build_bundle
from opcap.model.sg_head import SceneGraphHead


class ChangeCaptioner(nn.Module):
    """Everything trainable, in one module for optimization and checkpoints.

    The auxiliary head shares nothing with the captioner but the bundle; its
    forward signature takes only features, so no caption state can leak in.
    """

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = ImageEncoder(cfg)
        self.attention = SpatialAttention(cfg)
        self.captioner = CaptionDecoder(cfg)
        self.sg_head = SceneGraphHead(cfg)

    def forward_bundle(self, img_a: torch.Tensor, img_b: torch.Tensor) -> FeatureBundle:
        return build_bundle(self.encoder, self.attention, img_a, img_b)

    def generate(self, img_a: torch.Tensor, img_b: torch.Tensor, **kw) -> list[list[int]]:
        return self.captioner.generate(self.forward_bundle(img_a, img_b), **kw)
