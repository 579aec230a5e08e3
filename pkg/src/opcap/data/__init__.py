from opcap.data.types import (
    AnnotationTimeline,
    SceneGraphTriplet,
    StatePairSample,
    TimelineEvent,
)
from opcap.data.vocab import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    UNK_ID,
    Vocabulary,
    build_vocabulary,
    detokenize_ids,
    normalize_caption,
    tokenize_caption,
)
from opcap.data.records import DatasetError, load_dataset, sample_to_json, write_records
from opcap.data.pairs import ExtractedPair, SkippedEvent, extract_state_pairs, write_skip_log
from opcap.data.targets import scene_graph_targets, target_length

__all__ = [
    "AnnotationTimeline",
    "SceneGraphTriplet",
    "StatePairSample",
    "TimelineEvent",
    "Vocabulary",
    "build_vocabulary",
    "tokenize_caption",
    "detokenize_ids",
    "normalize_caption",
    "PAD_ID",
    "BOS_ID",
    "EOS_ID",
    "UNK_ID",
    "DatasetError",
    "load_dataset",
    "write_records",
    "sample_to_json",
    "ExtractedPair",
    "SkippedEvent",
    "extract_state_pairs",
    "write_skip_log",
    "scene_graph_targets",
    "target_length",
]
