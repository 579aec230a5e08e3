"""Model dimensions. Defaults are the desk-scale configuration."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass


@dataclass
class ModelConfig:
    vocab_size: int
    image_size: int = 64
    channels: int = 64  # feature channels C
    feat_hw: int = 8  # spatial side of the feature maps
    attn_hidden: int = 64  # hidden width of the 1x1 spatial-attention conv
    embed_size: int = 64
    hidden_size: int = 128  # recurrent state D
    max_len: int = 16
    max_triplets: int = 8
    precomputed_features: bool = False  # feed stored feature maps, skip the conv stack

    def __post_init__(self):
        if self.vocab_size < 5:
            raise ValueError("vocab_size must cover the reserved ids")
        ratio = self.image_size / self.feat_hw
        stages = math.log2(ratio)
        if not self.precomputed_features and (ratio < 2 or stages != int(stages)):
            raise ValueError(
                f"image_size/feat_hw must be a power of two >= 2, got {self.image_size}/{self.feat_hw}"
            )

    @property
    def num_stages(self) -> int:
        return int(math.log2(self.image_size // self.feat_hw))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)
