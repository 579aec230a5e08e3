"""Dynamic-attention caption decoder and its training loss.

At every step the decoder re-scores the three feature streams (current,
target, difference) against its recurrent state, mixes them into a context
vector, and advances a GRU cell over [token embedding; context].
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F

from opcap.data.vocab import BOS_ID, EOS_ID, PAD_ID
from opcap.model.config import ModelConfig
from opcap.model.encoder import FeatureBundle


@dataclass
class DecoderState:
    hidden: torch.Tensor  # (..., D)
    step: int = 0


class DynamicAttention(nn.Module):
    """Additive attention over the three feature streams given the state."""

    def __init__(self, channels: int, hidden_size: int):
        super().__init__()
        self.state_proj = nn.Linear(hidden_size, channels)
        self.stream_proj = nn.Linear(channels, channels)
        self.score = nn.Linear(channels, 1)

    def forward(self, streams: torch.Tensor, hidden: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """streams (..., 3, C), hidden (..., D) -> context (..., C), weights (..., 3)."""
        scores = self.score(torch.tanh(self.stream_proj(streams) + self.state_proj(hidden).unsqueeze(-2)))
        weights = torch.softmax(scores.squeeze(-1), dim=-1)
        context = (streams * weights.unsqueeze(-1)).sum(dim=-2)
        return context, weights


class CaptionDecoder(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.embedding = nn.Embedding(cfg.vocab_size, cfg.embed_size, padding_idx=PAD_ID)
        self.attention = DynamicAttention(cfg.channels, cfg.hidden_size)
        self.cell = nn.GRUCell(cfg.embed_size + cfg.channels, cfg.hidden_size)
        self.out = nn.Linear(cfg.hidden_size, cfg.vocab_size)

    def init_state(self, batch: int, device=None, dtype=None) -> DecoderState:
        p = next(self.parameters())
        return DecoderState(
            hidden=torch.zeros(batch, self.cfg.hidden_size, device=device or p.device, dtype=dtype or p.dtype)
        )

    def decode_step(
        self, context: torch.Tensor, prev_token: torch.Tensor, state: DecoderState
    ) -> tuple[torch.Tensor, DecoderState]:
        """One recurrent step: (logits over vocab, advanced state)."""
        if prev_token.min() < 0 or prev_token.max() >= self.cfg.vocab_size:
            raise ValueError("prev_token outside the vocabulary")
        inp = torch.cat([self.embedding(prev_token), context], dim=-1)
        hidden = self.cell(inp, state.hidden)
        return self.out(hidden), DecoderState(hidden=hidden, step=state.step + 1)

    def teacher_forced(
        self, bundle: FeatureBundle, refs: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Run with reference inputs refs (B, T) = [BOS, ..., EOS, PAD...].

        Returns logits (B, T-1, V) predicting refs[:, 1:] and the per-step
        dynamic weights (B, T-1, 3).
        """
        streams = bundle.streams()
        state = self.init_state(refs.shape[0], device=refs.device, dtype=streams.dtype)
        logits, weights = [], []
        for t in range(refs.shape[1] - 1):
            context, w = self.attention(streams, state.hidden)
            step_logits, state = self.decode_step(context, refs[:, t], state)
            logits.append(step_logits)
            weights.append(w)
        return torch.stack(logits, dim=1), torch.stack(weights, dim=1)

    @torch.no_grad()
    def generate(self, bundle: FeatureBundle, strategy: str = "greedy",
                 beam_width: int = 1, max_len: int | None = None) -> list[list[int]]:
        """Decode token ids (EOS-terminated, BOS excluded) per batch element."""
        max_len = max_len or self.cfg.max_len
        if max_len < 2:
            raise ValueError("max_len must be >= 2")
        if strategy == "greedy":
            return self._greedy(bundle, max_len)
        if strategy == "beam":
            streams = bundle.streams()
            return [self._beam_one(streams[i], beam_width, max_len) for i in range(streams.shape[0])]
        raise ValueError(f"unknown strategy {strategy!r}")

    def _greedy(self, bundle: FeatureBundle, max_len: int) -> list[list[int]]:
        streams = bundle.streams()
        batch = streams.shape[0]
        state = self.init_state(batch, device=streams.device, dtype=streams.dtype)
        tokens = torch.full((batch,), BOS_ID, dtype=torch.long, device=streams.device)
        done = torch.zeros(batch, dtype=torch.bool, device=streams.device)
        out: list[list[int]] = [[] for _ in range(batch)]
        for _ in range(max_len - 1):
            context, _ = self.attention(streams, state.hidden)
            logits, state = self.decode_step(context, tokens, state)
            tokens = logits.argmax(dim=-1)
            for i in range(batch):
                if not done[i]:
                    tok = int(tokens[i])
                    out[i].append(tok)
                    if tok == EOS_ID:
                        done[i] = True
            if done.all():
                break
        return out

    def _beam_one(self, streams: torch.Tensor, beam_width: int, max_len: int) -> list[int]:
        """Highest cumulative log-probability sequence; ties break to the
        lexicographically smallest id sequence."""
        if beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        streams = streams.unsqueeze(0)
        init = self.init_state(1, device=streams.device, dtype=streams.dtype)
        # (score, tokens, state); score is cumulative log-prob
        beams: list[tuple[float, list[int], DecoderState]] = [(0.0, [], init)]
        finished: list[tuple[float, list[int]]] = []
        for _ in range(max_len - 1):
            candidates: list[tuple[float, list[int], DecoderState]] = []
            for score, toks, state in beams:
                prev = torch.tensor([toks[-1] if toks else BOS_ID], device=streams.device)
                context, _ = self.attention(streams, state.hidden)
                logits, next_state = self.decode_step(context, prev, state)
                logp = F.log_softmax(logits[0], dim=-1)
                top = torch.topk(logp, min(beam_width, logp.shape[-1]))
                for lp, tok in zip(top.values.tolist(), top.indices.tolist()):
                    candidates.append((score + lp, toks + [tok], next_state))
            candidates.sort(key=lambda c: (-c[0], c[1]))
            beams = []
            for score, toks, state in candidates[:beam_width]:
                if toks[-1] == EOS_ID:
                    finished.append((score, toks))
                else:
                    beams.append((score, toks, state))
            if not beams:
                break
        # beams that ran out of length count as completed as-is
        finished.extend((score, toks) for score, toks, _ in beams)
        finished.sort(key=lambda c: (-c[0], c[1]))
        return finished[0][1]


def caption_loss(logits: torch.Tensor, refs: torch.Tensor, pad_id: int = PAD_ID) -> torch.Tensor:
    """Mean cross-entropy over non-PAD reference positions."""
    if logits.shape[:-1] != refs.shape:
        raise ValueError(f"length mismatch: logits {tuple(logits.shape)} vs refs {tuple(refs.shape)}")
    return F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), refs.reshape(-1), ignore_index=pad_id
    )
