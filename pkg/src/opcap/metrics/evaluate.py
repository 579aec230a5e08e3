"""End-to-end evaluation of a checkpoint on a dataset split."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from opcap.data.records import load_dataset
from opcap.data.vocab import build_vocabulary, detokenize_ids, normalize_caption
from opcap.metrics.content import POS_METRIC_CLASSES, PosLexicon, content_word_prf
from opcap.metrics.text import bleu, cider, corpus_bleu, rouge_l
from opcap.training.checkpoint import load_checkpoint
from opcap.training.loop import TrainConfig, prepare_split


class VocabMismatchError(Exception):
    pass


@dataclass
class EvalReport:
    """Per-system metric table mirroring the standard caption benchmark layout."""

    sample_count: int
    bleu_smoothed: tuple[float, float, float, float]
    bleu_corpus: tuple[float, float, float, float]
    rouge_l: float
    cider: float
    cider_degenerate: bool = False
    content: dict[str, tuple[float, float, float]] = field(default_factory=dict)

    def validate(self) -> None:
        unit = list(self.bleu_smoothed) + list(self.bleu_corpus) + [self.rouge_l]
        for cls, prf in self.content.items():
            unit.extend(prf)
            p, r, f = prf
            expected = 2 * p * r / (p + r) if p + r > 0 else 0.0
            if abs(f - expected) > 1e-9:
                raise ValueError(f"{cls} F is not the harmonic mean of P and R")
        if any(not (0.0 <= v <= 1.0) for v in unit):
            raise ValueError("a unit-interval metric left [0, 1]")
        if self.cider < 0:
            raise ValueError("CIDEr must be >= 0")

    def row(self) -> dict[str, float]:
        out = {"n_samples": self.sample_count}
        for i, v in enumerate(self.bleu_smoothed, start=1):
            out[f"bleu{i}"] = v
        for i, v in enumerate(self.bleu_corpus, start=1):
            out[f"bleu{i}_corpus"] = v
        out["rouge_l"] = self.rouge_l
        out["cider"] = self.cider
        for cls in POS_METRIC_CLASSES:
            p, r, f = self.content.get(cls, (0.0, 0.0, 0.0))
            out[f"{cls}_p"], out[f"{cls}_r"], out[f"{cls}_f"] = p, r, f
        return out


def score_captions(
    hypotheses: list[list[str]], references: list[list[str]], lexicon: PosLexicon
) -> EvalReport:
    """All metrics for aligned hypothesis/reference token lists."""
    refs_nested = [[r] for r in references]
    sent_bleu = np.mean([bleu(h, rs) for h, rs in zip(hypotheses, refs_nested)], axis=0)
    cider_score, _, degenerate = cider(hypotheses, refs_nested)
    report = EvalReport(
        sample_count=len(hypotheses),
        bleu_smoothed=tuple(float(x) for x in sent_bleu),
        bleu_corpus=tuple(corpus_bleu(hypotheses, refs_nested)),
        rouge_l=float(np.mean([rouge_l(h, r) for h, r in zip(hypotheses, references)])),
        cider=cider_score,
        cider_degenerate=degenerate,
        content={
            cls: content_word_prf(hypotheses, references, lexicon, cls) for cls in POS_METRIC_CLASSES
        },
    )
    report.validate()
    return report


def evaluate(
    checkpoint_path,
    data_dir,
    split: str,
    lexicon: PosLexicon,
    strategy: str = "greedy",
    beam_width: int = 1,
    batch_size: int = 64,
) -> EvalReport:
    """Generate captions for a whole split and score them.

    Refuses to run when the checkpoint vocabulary does not match the one the
    dataset's train split induces (hash comparison).
    """
    model, vocab, meta = load_checkpoint(checkpoint_path)
    cfg = TrainConfig(**meta["config_echo"]) if meta["config_echo"] else TrainConfig()
    train_samples = load_dataset(data_dir, "train", check_images=False)
    data_vocab = build_vocabulary(train_samples, min_count=cfg.min_count)
    if data_vocab.content_hash() != meta["vocab_hash"]:
        raise VocabMismatchError(
            f"checkpoint vocabulary {meta['vocab_hash'][:12]} does not match dataset "
            f"vocabulary {data_vocab.content_hash()[:12]} (train split of {data_dir})"
        )
    samples = load_dataset(data_dir, split)
    arrays = prepare_split(samples, vocab, cfg, data_dir)
    hypotheses: list[list[str]] = []
    model.eval()
    with torch.no_grad():
        for lo in range(0, len(arrays), batch_size):
            idx = np.arange(lo, min(lo + batch_size, len(arrays)))
            img_a, img_b = arrays.model_inputs(idx)
            rows = model.generate(img_a, img_b, strategy=strategy, beam_width=beam_width)
            hypotheses.extend(detokenize_ids(row, vocab) for row in rows)
    references = [normalize_caption(s.caption) for s in samples]
    return score_captions(hypotheses, references, lexicon)


REPORT_COLUMNS = (
    ["system", "n_samples"]
    + [f"bleu{i}" for i in range(1, 5)]
    + [f"bleu{i}_corpus" for i in range(1, 5)]
    + ["rouge_l", "cider"]
    + [f"{cls}_{m}" for cls in POS_METRIC_CLASSES for m in ("p", "r", "f")]
)


def write_report(path, reports: dict[str, EvalReport]) -> Path:
    """Delimited text table, one row per system."""
    lines = ["\t".join(REPORT_COLUMNS)]
    for system, report in reports.items():
        row = report.row()
        lines.append(
            "\t".join([system] + [f"{row[c]:.6f}" if c != "n_samples" else str(row[c]) for c in REPORT_COLUMNS[1:]])
        )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_report(path) -> dict[str, dict[str, float]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split("\t")
    out = {}
    for line in lines[1:]:
        if not line.strip():
            continue
        cells = line.split("\t")
        out[cells[0]] = {k: float(v) for k, v in zip(header[1:], cells[1:])}
    return out
