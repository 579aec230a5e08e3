from opcap.model.config import ModelConfig
from opcap.model.encoder import (
    AttentionMap,
    FeatureBundle,
    FeatureMap,
    ImageEncoder,
    SpatialAttention,
    attended_feature,
    compute_difference,
)
from opcap.model.decoder import CaptionDecoder, DecoderState, DynamicAttention, caption_loss
from opcap.model.sg_head import SceneGraphHead, build_role_masks, decode_triplets, sg_loss
from opcap.model.network import ChangeCaptioner
from opcap.model.features import read_feature_file, write_feature_file

__all__ = [
    "ModelConfig",
    "FeatureMap",
    "AttentionMap",
    "FeatureBundle",
    "ImageEncoder",
    "SpatialAttention",
    "compute_difference",
    "attended_feature",
    "DecoderState",
    "DynamicAttention",
    "CaptionDecoder",
    "caption_loss",
    "SceneGraphHead",
    "build_role_masks",
    "decode_triplets",
    "sg_loss",
    "ChangeCaptioner",
    "read_feature_file",
    "write_feature_file",
]
