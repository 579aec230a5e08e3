"""Auxiliary sequential scene-graph predictor.

A second recurrent head with its own parameters reads the same feature
bundle as the caption decoder (never any caption state) and emits repeated
subject-relationship-object tokens. It is supervision-only: inference runs
the caption decoder alone.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from opcap.data.vocab import BOS_ID, EOS_ID, PAD_ID, Vocabulary
from opcap.model.config import ModelConfig
from opcap.model.decoder import DecoderState, DynamicAttention
from opcap.model.encoder import FeatureBundle


def build_role_masks(vocab: Vocabulary, device=None) -> torch.Tensor:
    """(3, V) bool masks of ids admissible at subject/relationship/object slots.

    EOS is admissible only at subject slots (triplet boundaries).
    """
    v = len(vocab)
    masks = torch.zeros(3, v, dtype=torch.bool, device=device)
    for i in vocab.subject_ids:
        masks[0, i] = True
    masks[0, EOS_ID] = True
    for i in vocab.relationship_ids:
        masks[1, i] = True
    for i in vocab.object_ids:
        masks[2, i] = True
    if not masks[1].any() or not masks[2].any():
        raise ValueError("vocabulary carries no scene-graph role ids")
    return masks


class SceneGraphHead(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.embedding = nn.Embedding(cfg.vocab_size, cfg.embed_size, padding_idx=PAD_ID)
        self.attention = DynamicAttention(cfg.channels, cfg.hidden_size)
        self.cell = nn.GRUCell(cfg.embed_size + cfg.channels, cfg.hidden_size)
        self.out = nn.Linear(cfg.hidden_size, cfg.vocab_size)

    def _step(self, streams, prev_token, state):
        context, w = self.attention(streams, state.hidden)
        inp = torch.cat([self.embedding(prev_token), context], dim=-1)
        hidden = self.cell(inp, state.hidden)
        return self.out(hidden), DecoderState(hidden=hidden, step=state.step + 1), w

    def teacher_forced(
        self, bundle: FeatureBundle, targets: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Logits (B, L, V) aligned with targets (B, L), plus stream weights."""
        streams = bundle.streams()
        batch, length = targets.shape
        state = DecoderState(
            hidden=torch.zeros(batch, self.cfg.hidden_size, device=streams.device, dtype=streams.dtype)
        )
        prev = torch.full((batch,), BOS_ID, dtype=torch.long, device=targets.device)
        logits, weights = [], []
        for t in range(length):
            step_logits, state, w = self._step(streams, prev, state)
            logits.append(step_logits)
            weights.append(w)
            prev = targets[:, t]
        return torch.stack(logits, dim=1), torch.stack(weights, dim=1)

    @torch.no_grad()
    def predict_triplets(
        self, bundle: FeatureBundle, max_triplets: int, role_masks: torch.Tensor
    ) -> tuple[torch.Tensor, list[list[tuple[int, int, int]]]]:
        """Greedy role-masked decoding of up to max_triplets triplets.

        Returns the raw logits (B, 3*max_triplets+1, V) and the decoded
        triplets per batch element (positions after EOS are ignored).
        """
        if max_triplets < 1:
            raise ValueError("max_triplets must be >= 1")
        streams = bundle.streams()
        batch = streams.shape[0]
        state = DecoderState(
            hidden=torch.zeros(batch, self.cfg.hidden_size, device=streams.device, dtype=streams.dtype)
        )
        prev = torch.full((batch,), BOS_ID, dtype=torch.long, device=streams.device)
        length = 3 * max_triplets + 1
        all_logits = []
        decoded_ids = torch.zeros(batch, length, dtype=torch.long, device=streams.device)
        for t in range(length):
            logits, state, _ = self._step(streams, prev, state)
            all_logits.append(logits)
            masked = logits.masked_fill(~role_masks[t % 3], float("-inf"))
            prev = masked.argmax(dim=-1)
            decoded_ids[:, t] = prev
        triplets: list[list[tuple[int, int, int]]] = []
        for b in range(batch):
            row, seq = decoded_ids[b].tolist(), []
            for k in range(max_triplets):
                s, r, o = row[3 * k : 3 * k + 3]
                if s == EOS_ID:
                    break
                seq.append((s, r, o))
            triplets.append(seq)
        return torch.stack(all_logits, dim=1), triplets


def decode_triplets(ids: list[int]) -> list[tuple[int, int, int]]:
    """Parse a flat [s, r, o, ..., EOS, PAD...] sequence into triplets."""
    out = []
    for k in range(len(ids) // 3):
        s, r, o = ids[3 * k : 3 * k + 3]
        if s in (EOS_ID, PAD_ID):
            break
        out.append((s, r, o))
    return out


def sg_loss(logits: torch.Tensor, targets: torch.Tensor, pad_id: int = PAD_ID) -> torch.Tensor:
    """Mean cross-entropy over non-PAD target positions."""
    if logits.shape[:-1] != targets.shape:
        raise ValueError(f"length mismatch: logits {tuple(logits.shape)} vs targets {tuple(targets.shape)}")
    return F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), targets.reshape(-1), ignore_index=pad_id
    )
