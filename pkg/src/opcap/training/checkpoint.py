"""Versioned checkpoint container.

A checkpoint is self-contained: it embeds the model config, the full
vocabulary (with role sets) and its hash, all parameter arrays under their
module-qualified names, optimizer state, and the epoch/step counters.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import torch

from opcap.data.vocab import Vocabulary
from opcap.model.config import ModelConfig
from opcap.model.network import ChangeCaptioner

FORMAT_VERSION = 1


def save_checkpoint(
    path,
    model: ChangeCaptioner,
    vocab: Vocabulary,
    epoch: int,
    step: int,
    optimizer: Optional[torch.optim.Optimizer] = None,
    config_echo: Optional[dict] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": FORMAT_VERSION,
        "model_config": model.cfg.to_dict(),
        "vocab": vocab.to_json_dict(),
        "vocab_hash": vocab.content_hash(),
        "model_state": model.state_dict(),
        "optimizer_state": optimizer.state_dict() if optimizer is not None else None,
        "epoch": epoch,
        "step": step,
        "config_echo": config_echo or {},
    }
    torch.save(payload, path)
    return path


def load_checkpoint(path) -> tuple[ChangeCaptioner, Vocabulary, dict]:
    """Rebuild (model, vocabulary, meta) from a checkpoint file.

    meta keeps epoch/step, the original config echo, the vocab hash, and the
    raw optimizer state for resumption.
    """
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format version {version!r}")
    cfg = ModelConfig.from_dict(payload["model_config"])
    model = ChangeCaptioner(cfg)
    model.load_state_dict(payload["model_state"])
    model.eval()
    vocab = Vocabulary.from_json_dict(payload["vocab"])
    meta = {
        "epoch": payload["epoch"],
        "step": payload["step"],
        "vocab_hash": payload["vocab_hash"],
        "config_echo": payload["config_echo"],
        "optimizer_state": payload["optimizer_state"],
    }
    return model, vocab, meta
