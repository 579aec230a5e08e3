"""Mini-batch training with scheduled task mixing, logging, checkpoints.

Everything random is a pure function of the run seed: parameter init uses
torch's global generator seeded once, and each epoch's batch order comes
from a generator seeded with (seed, epoch), so reruns and resumed data
workers agree bit-for-bit.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from opcap.data.records import load_dataset
from opcap.data.targets import scene_graph_targets
from opcap.data.vocab import PAD_ID, Vocabulary, build_vocabulary, detokenize_ids, normalize_caption, tokenize_caption
from opcap.model.config import ModelConfig
from opcap.model.features import read_feature_file
from opcap.model.network import ChangeCaptioner
from opcap.training.checkpoint import save_checkpoint
from opcap.training.losses import BranchTerms, LossConfig, baseline_loss, combined_loss, regularizers
from opcap.training.schedules import alpha_schedule, lr_schedule
from opcap.world.render import load_image

LOG_COLUMNS = ("epoch", "lr", "alpha", "l_cap", "l_sgr", "dev_bleu4", "seconds")


@dataclass
class TrainConfig:
    # model
    image_size: int = 64
    channels: int = 64
    feat_hw: int = 8
    attn_hidden: int = 64
    embed_size: int = 64
    hidden_size: int = 128
    max_len: int = 16
    max_triplets: int = 8
    # vocabulary
    min_count: int = 1
    # optimization
    epochs: int = 40
    batch_size: int = 32
    optimizer: str = "sgd"
    momentum: float = 0.9
    base_lr: float = 0.01
    lr_factor: float = 0.1
    lr_step_epochs: int = 20
    # loss
    lambda_l1: float = 2.5e-3
    lambda_ent: float = 1e-4
    alpha_mode: str = "baseline"
    alpha: float = 0.9
    alpha_low: float = 0.1
    alpha_high: float = 0.9
    period_epochs: int = 10
    sg_mode: str = "all"
    # run
    seed: int = 0
    precomputed_features: Optional[str] = None

    def __post_init__(self):
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError("optimizer must be 'sgd' or 'adam'")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        self.loss_config()  # validates the loss fields

    def loss_config(self) -> LossConfig:
        return LossConfig(
            lambda_l1=self.lambda_l1,
            lambda_ent=self.lambda_ent,
            alpha_mode=self.alpha_mode,
            alpha=self.alpha,
            alpha_low=self.alpha_low,
            alpha_high=self.alpha_high,
            period_epochs=self.period_epochs,
            sg_mode=self.sg_mode,
        )

    def model_config(self, vocab_size: int) -> ModelConfig:
        return ModelConfig(
            vocab_size=vocab_size,
            image_size=self.image_size,
            channels=self.channels,
            feat_hw=self.feat_hw,
            attn_hidden=self.attn_hidden,
            embed_size=self.embed_size,
            hidden_size=self.hidden_size,
            max_len=self.max_len,
            max_triplets=self.max_triplets,
            precomputed_features=self.precomputed_features is not None,
        )


def config_keys() -> tuple[str, ...]:
    return tuple(TrainConfig.__dataclass_fields__)


def load_train_config(path=None, overrides: Optional[dict] = None) -> TrainConfig:
    """Packaged defaults, then an optional config file, then overrides."""
    base = json.loads(files("opcap.configs").joinpath("default.json").read_text())
    if path is not None:
        base.update(json.loads(Path(path).read_text()))
    for key, value in (overrides or {}).items():
        if key not in TrainConfig.__dataclass_fields__:
            raise KeyError(f"unknown config key {key!r}")
        base[key] = value
    unknown = set(base) - set(TrainConfig.__dataclass_fields__)
    if unknown:
        raise KeyError(f"unknown config keys: {sorted(unknown)}")
    return TrainConfig(**base)


@dataclass
class SplitArrays:
    """Tensorized split: inputs plus caption/graph targets."""

    ids: list[str]
    images_a: torch.Tensor  # uint8 (N, 3, S, S) or float32 features
    images_b: torch.Tensor
    captions: torch.Tensor  # (N, max_len) int64
    sg_targets: torch.Tensor  # (N, 3*max_triplets+1) int64
    references: list[list[str]]  # normalized caption tokens

    def __len__(self) -> int:
        return len(self.ids)

    def model_inputs(self, idx: np.ndarray, dtype=torch.float32) -> tuple[torch.Tensor, torch.Tensor]:
        a, b = self.images_a[idx], self.images_b[idx]
        if a.dtype == torch.uint8:
            return a.to(dtype) / 255.0, b.to(dtype) / 255.0
        return a.to(dtype), b.to(dtype)


def prepare_split(samples, vocab: Vocabulary, cfg: TrainConfig, root) -> SplitArrays:
    root = Path(root)
    store = read_feature_file(cfg.precomputed_features) if cfg.precomputed_features else None

    def fetch(ref: str) -> torch.Tensor:
        if store is not None:
            if ref not in store:
                raise KeyError(f"no precomputed features for {ref!r}")
            return torch.from_numpy(store[ref])
        arr = load_image(root / ref)
        return torch.from_numpy(arr.copy()).permute(2, 0, 1)

    return SplitArrays(
        ids=[s.id for s in samples],
        images_a=torch.stack([fetch(s.image_a) for s in samples]),
        images_b=torch.stack([fetch(s.image_b) for s in samples]),
        captions=torch.tensor(
            [tokenize_caption(s.caption, vocab, cfg.max_len) for s in samples], dtype=torch.long
        ),
        sg_targets=torch.tensor(
            [scene_graph_targets(s, cfg.sg_mode, vocab, cfg.max_triplets) for s in samples],
            dtype=torch.long,
        ),
        references=[normalize_caption(s.caption) for s in samples],
    )


def batch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    return np.random.default_rng((seed, epoch)).permutation(n)


@dataclass
class TrainState:
    model: ChangeCaptioner
    optimizer: torch.optim.Optimizer
    vocab: Vocabulary
    epoch: int = 0
    step: int = 0
    seed: int = 0
    log_rows: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_dev_bleu4: float = float("-inf")


def dev_bleu4(model: ChangeCaptioner, split: SplitArrays, vocab: Vocabulary,
              batch_size: int = 64) -> float:
    """Mean smoothed sentence BLEU-4 of greedy captions against references."""
    from opcap.metrics.text import bleu  # deferred: metrics.evaluate imports this module

    model.eval()
    scores = []
    with torch.no_grad():
        for lo in range(0, len(split), batch_size):
            idx = np.arange(lo, min(lo + batch_size, len(split)))
            img_a, img_b = split.model_inputs(idx)
            for row, ref_i in zip(model.generate(img_a, img_b), idx):
                hyp = detokenize_ids(row, vocab)
                scores.append(bleu(hyp, [split.references[ref_i]], max_n=4)[3])
    model.train()
    return float(np.mean(scores)) if scores else 0.0


def _epoch_pass(model, optimizer, split: SplitArrays, loss_cfg: LossConfig, alpha: float,
                order: np.ndarray, batch_size: int, epoch: int, state: TrainState):
    cap_sum, sgr_sum, batches = 0.0, 0.0, 0
    use_aux = loss_cfg.alpha_mode != "baseline"
    for lo in range(0, len(order), batch_size):
        idx = order[lo : lo + batch_size]
        img_a, img_b = split.model_inputs(idx)
        refs = split.captions[idx]
        bundle = model.forward_bundle(img_a, img_b)
        logits, dyn_w = model.captioner.teacher_forced(bundle, refs)
        targets = refs[:, 1:]
        l_cap = torch.nn.functional.cross_entropy(
            logits.reshape(-1, logits.shape[-1]), targets.reshape(-1), ignore_index=PAD_ID
        )
        l1, ent = regularizers(bundle.a_a, bundle.a_b, dyn_w, (targets != PAD_ID).to(dyn_w.dtype))
        cap_terms = BranchTerms(l_cap, l1, ent)
        if use_aux:
            sg_t = split.sg_targets[idx]
            sg_logits, sg_w = model.sg_head.teacher_forced(bundle, sg_t)
            l_sgr = torch.nn.functional.cross_entropy(
                sg_logits.reshape(-1, sg_logits.shape[-1]), sg_t.reshape(-1), ignore_index=PAD_ID
            )
            _, sg_ent = regularizers(bundle.a_a, bundle.a_b, sg_w, (sg_t != PAD_ID).to(sg_w.dtype))
            loss = combined_loss(cap_terms, BranchTerms(l_sgr, l1, sg_ent), alpha, loss_cfg)
            sgr_sum += l_sgr.detach().item()
        else:
            loss = baseline_loss(cap_terms, loss_cfg)
        if not torch.isfinite(loss):
            ids = [split.ids[i] for i in idx[:4]]
            raise RuntimeError(
                f"non-finite loss at epoch {epoch} batch {batches} (sample ids {ids}...)"
            )
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        cap_sum += l_cap.detach().item()
        batches += 1
        state.step += 1
    return cap_sum / max(batches, 1), (sgr_sum / max(batches, 1)) if use_aux else 0.0


def train(data_dir, cfg: TrainConfig, out_dir, quiet: bool = False) -> TrainState:
    """Full training run over a dataset directory; returns the final state.

    Writes per-epoch checkpoints, a best-dev checkpoint, log.tsv, vocab.tsv,
    and an echo of the resolved configuration into out_dir.
    """
    torch.manual_seed(cfg.seed)
    torch.use_deterministic_algorithms(True)
    out = Path(out_dir)
    (out / "checkpoints").mkdir(parents=True, exist_ok=True)

    train_samples = load_dataset(data_dir, "train", check_images=cfg.precomputed_features is None)
    if not train_samples:
        raise ValueError("train split is empty")
    try:
        dev_samples = load_dataset(data_dir, "dev", check_images=cfg.precomputed_features is None)
    except Exception:
        dev_samples = []
    vocab = build_vocabulary(train_samples, min_count=cfg.min_count)
    vocab.save(out / "vocab.tsv")
    (out / "resolved_config.json").write_text(json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n")

    train_split = prepare_split(train_samples, vocab, cfg, data_dir)
    dev_split = prepare_split(dev_samples, vocab, cfg, data_dir) if dev_samples else None

    model = ChangeCaptioner(cfg.model_config(len(vocab)))
    model.train()
    loss_cfg = cfg.loss_config()
    if cfg.optimizer == "sgd":
        optimizer = torch.optim.SGD(model.parameters(), lr=cfg.base_lr, momentum=cfg.momentum)
    else:
        optimizer = torch.optim.Adam(model.parameters(), lr=cfg.base_lr)

    state = TrainState(model=model, optimizer=optimizer, vocab=vocab, seed=cfg.seed)
    config_echo = asdict(cfg)
    log_path = out / "log.tsv"
    with log_path.open("w", encoding="utf-8") as log:
        log.write("\t".join(LOG_COLUMNS) + "\n")
        for epoch in range(cfg.epochs):
            t0 = time.perf_counter()
            lr = lr_schedule(epoch, base=cfg.base_lr, factor=cfg.lr_factor, step_epochs=cfg.lr_step_epochs)
            for group in optimizer.param_groups:
                group["lr"] = lr
            alpha = alpha_schedule(epoch, loss_cfg)
            order = batch_order(cfg.seed, epoch, len(train_split))
            l_cap, l_sgr = _epoch_pass(
                model, optimizer, train_split, loss_cfg, alpha, order, cfg.batch_size, epoch, state
            )
            score = dev_bleu4(model, dev_split, vocab) if dev_split else float("nan")
            state.epoch = epoch + 1
            row = {
                "epoch": epoch,
                "lr": lr,
                "alpha": alpha,
                "l_cap": round(l_cap, 6),
                "l_sgr": round(l_sgr, 6),
                "dev_bleu4": round(score, 6) if score == score else "",
                "seconds": round(time.perf_counter() - t0, 2),
            }
            state.log_rows.append(row)
            log.write("\t".join(str(row[c]) for c in LOG_COLUMNS) + "\n")
            log.flush()
            if not quiet:
                print("  ".join(f"{c}={row[c]}" for c in LOG_COLUMNS), flush=True)
            save_checkpoint(
                out / "checkpoints" / f"epoch_{epoch:03d}.pt",
                model, vocab, epoch, state.step, optimizer, config_echo,
            )
            # dev BLEU-4 selects best; with no dev split the last epoch wins
            better = score > state.best_dev_bleu4 if dev_split else True
            if better:
                state.best_dev_bleu4 = score if dev_split else float("nan")
                state.best_epoch = epoch
                save_checkpoint(out / "checkpoints" / "best.pt",
                                model, vocab, epoch, state.step, optimizer, config_echo)
    return state
