"""Auxiliary-task target sequences built from a sample's scene graphs."""

from __future__ import annotations

from opcap.data.types import StatePairSample
from opcap.data.vocab import EOS_ID, PAD_ID, Vocabulary

SG_MODES = ("all", "diff")


def target_length(max_triplets: int) -> int:
    # 3 role slots per triplet plus one EOS slot
    return 3 * max_triplets + 1


def scene_graph_targets(
    sample: StatePairSample, mode: str, vocab: Vocabulary, max_triplets: int
) -> list[int]:
    """Flat [s, r, o, s, r, o, ..., EOS, PAD...] id sequence for one sample.

    mode="all" targets the union of both states' graphs; mode="diff" targets
    their symmetric difference (triplets present in exactly one state).
    Triplets are serialized in canonical order: sorted by (subject id,
    relationship id, object id).
    """
    if mode not in SG_MODES:
        raise ValueError(f"mode must be one of {SG_MODES}, got {mode!r}")
    if max_triplets < 1:
        raise ValueError("max_triplets must be >= 1")
    if mode == "all":
        triplets = sample.graphs_a | sample.graphs_b
    else:
        triplets = sample.graphs_a ^ sample.graphs_b
    encoded = sorted(
        (vocab.encode_strict(t.subject), vocab.encode_strict(t.relationship), vocab.encode_strict(t.object))
        for t in triplets
    )[:max_triplets]
    seq: list[int] = [i for triple in encoded for i in triple]
    seq.append(EOS_ID)
    seq.extend([PAD_ID] * (target_length(max_triplets) - len(seq)))
    return seq
