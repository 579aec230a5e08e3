"""Content-word precision/recall/F over nouns, verbs, and independent verbs."""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Sequence

from opcap.data.vocab import POS_CLASSES

POS_METRIC_CLASSES = ("noun", "verb", "verb_independent")

# which lexicon tags feed each metric class; plain "verb" includes auxiliaries,
# "verb_independent" excludes them
_CLASS_TAGS = {
    "noun": ("noun",),
    "verb": ("verb", "aux_verb"),
    "verb_independent": ("verb",),
}


class PosLexicon:
    """token → POS class, total over any vocabulary via the 'other' default."""

    def __init__(self, entries: dict[str, str]):
        for tok, tag in entries.items():
            if tag not in POS_CLASSES:
                raise ValueError(f"unknown POS class {tag!r} for token {tok!r}")
        self.entries = dict(entries)

    def classify(self, token: str) -> str:
        return self.entries.get(token, "other")

    @classmethod
    def from_file(cls, path) -> "PosLexicon":
        entries = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            tok, _, tag = line.partition("\t")
            entries[tok] = tag.strip() or "other"
        return cls(entries)

    def save(self, path) -> None:
        lines = [f"{tok}\t{tag}" for tok, tag in sorted(self.entries.items())]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _class_tokens(tokens: Sequence[str], lexicon: PosLexicon, pos_class: str) -> Counter:
    tags = _CLASS_TAGS[pos_class]
    return Counter(t for t in tokens if lexicon.classify(t) in tags)


def content_word_prf(
    hypotheses: list[Sequence[str]],
    references: list[Sequence[str]],
    lexicon: PosLexicon,
    pos_class: str,
) -> tuple[float, float, float]:
    """Micro-averaged multiset P/R/F of class tokens shared with the reference."""
    if pos_class not in POS_METRIC_CLASSES:
        raise ValueError(f"pos_class must be one of {POS_METRIC_CLASSES}")
    if len(hypotheses) != len(references):
        raise ValueError("hypotheses and references must align")
    match = hyp_total = ref_total = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_counts = _class_tokens(hyp, lexicon, pos_class)
        ref_counts = _class_tokens(ref, lexicon, pos_class)
        match += sum((hyp_counts & ref_counts).values())
        hyp_total += sum(hyp_counts.values())
        ref_total += sum(ref_counts.values())
    p = match / hyp_total if hyp_total else 0.0
    r = match / ref_total if ref_total else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f
