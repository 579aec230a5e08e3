"""Vocabulary construction and caption tokenization."""

from __future__ import annotations

import hashlib
import json
import re
from collections import Counter
from pathlib import Path
from typing import Iterable, Optional

from opcap.data.types import StatePairSample

PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3
RESERVED_TOKENS = ("<pad>", "<bos>", "<eos>", "<unk>")

POS_CLASSES = ("noun", "verb", "aux_verb", "other")

_TOKEN_RE = re.compile(r"[^\w]+", re.UNICODE)


def normalize_caption(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation; punctuation is dropped."""
    return [t for t in _TOKEN_RE.split(text.lower()) if t]


class Vocabulary:
    """Bijective token↔id map with fixed reserved ids and optional POS tags.

    Also records which ids may appear in each scene-graph role (subject,
    relationship, object), used for role-masked triplet decoding.
    """

    def __init__(
        self,
        tokens: Iterable[str],
        pos_tags: Optional[dict[str, str]] = None,
        sg_roles: Optional[dict[str, set[str]]] = None,
    ):
        self.id_to_token: list[str] = list(RESERVED_TOKENS) + list(tokens)
        self.token_to_id: dict[str, int] = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")
        self.pos_tag: dict[str, str] = dict(pos_tags or {})
        for tag in self.pos_tag.values():
            if tag not in POS_CLASSES:
                raise ValueError(f"unknown POS class {tag!r}")
        roles = sg_roles or {}
        self.subject_ids = frozenset(self.token_to_id[t] for t in roles.get("subject", ()))
        self.relationship_ids = frozenset(self.token_to_id[t] for t in roles.get("relationship", ()))
        self.object_ids = frozenset(self.token_to_id[t] for t in roles.get("object", ()))

    def __len__(self) -> int:
        return len(self.id_to_token)

    def encode(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def encode_strict(self, token: str) -> int:
        if token not in self.token_to_id:
            raise KeyError(f"token {token!r} not in vocabulary")
        return self.token_to_id[token]

    def decode(self, idx: int) -> str:
        return self.id_to_token[idx]

    def to_json_dict(self) -> dict:
        return {
            "tokens": self.id_to_token[len(RESERVED_TOKENS):],
            "pos": {t: p for t, p in sorted(self.pos_tag.items())},
            "roles": {
                "subject": sorted(self.id_to_token[i] for i in self.subject_ids),
                "relationship": sorted(self.id_to_token[i] for i in self.relationship_ids),
                "object": sorted(self.id_to_token[i] for i in self.object_ids),
            },
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Vocabulary":
        roles = {k: set(v) for k, v in d.get("roles", {}).items()}
        return cls(d["tokens"], pos_tags=d.get("pos") or None, sg_roles=roles)

    def content_hash(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        """One token per line in id order; POS tag as a second TAB column when known."""
        lines = []
        for tok in self.id_to_token:
            pos = self.pos_tag.get(tok)
            lines.append(f"{tok}\t{pos}" if pos else tok)
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        tokens, pos_tags = [], {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            parts = line.split("\t")
            tokens.append(parts[0])
            if len(parts) > 1 and parts[1]:
                pos_tags[parts[0]] = parts[1]
        if tokens[: len(RESERVED_TOKENS)] != list(RESERVED_TOKENS):
            raise ValueError(f"vocabulary file must start with reserved tokens {RESERVED_TOKENS}")
        return cls(tokens[len(RESERVED_TOKENS):], pos_tags=pos_tags or None)


def build_vocabulary(
    samples: list[StatePairSample],
    min_count: int = 1,
    pos_tags: Optional[dict[str, str]] = None,
) -> Vocabulary:
    """Build the joint caption + scene-graph vocabulary from a corpus.

    Caption tokens with corpus frequency >= min_count are kept; scene-graph
    labels are always kept regardless of frequency. Ordering is deterministic:
    caption frequency descending, then lexicographic.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    if not samples:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    counts: Counter[str] = Counter()
    for s in samples:
        counts.update(normalize_caption(s.caption))
    roles: dict[str, set[str]] = {"subject": set(), "relationship": set(), "object": set()}
    sg_labels: set[str] = set()
    for s in samples:
        for g in (s.graphs_a, s.graphs_b):
            for t in g:
                roles["subject"].add(t.subject)
                roles["relationship"].add(t.relationship)
                roles["object"].add(t.object)
                sg_labels.update(t)
    kept = {t for t, c in counts.items() if c >= min_count} | sg_labels
    ordered = sorted(kept, key=lambda t: (-counts[t], t))
    tags = {t: pos_tags[t] for t in ordered if pos_tags and t in pos_tags} if pos_tags else None
    return Vocabulary(ordered, pos_tags=tags, sg_roles=roles)


def tokenize_caption(text: str, vocab: Vocabulary, max_len: int) -> list[int]:
    """Encode a caption as [BOS, ids..., EOS, PAD...] of length exactly max_len.

    Content is truncated to max_len - 2 so EOS is always present and last.
    """
    if max_len < 3:
        raise ValueError("max_len must be >= 3")
    ids = [vocab.encode(t) for t in normalize_caption(text)][: max_len - 2]
    seq = [BOS_ID] + ids + [EOS_ID]
    seq.extend([PAD_ID] * (max_len - len(seq)))
    return seq


def detokenize_ids(ids: Iterable[int], vocab: Vocabulary) -> list[str]:
    """Inverse of tokenize_caption: stop at EOS, drop PAD/BOS."""
    out = []
    for i in ids:
        if i == EOS_ID:
            break
        if i in (PAD_ID, BOS_ID):
            continue
        out.append(vocab.decode(i))
    return out
