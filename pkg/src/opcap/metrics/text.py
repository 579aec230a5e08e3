"""Caption similarity metrics, implemented from first definitions.

All functions take pre-tokenized sequences (lists of token strings). Each is
checked against an independent brute-force oracle in the test suite.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

Tokens = Sequence[str]


def _ngram_counts(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _closest_ref_len(hyp_len: int, ref_lens: list[int]) -> int:
    return min(ref_lens, key=lambda r: (abs(r - hyp_len), r))


def bleu(hypothesis: Tokens, references: list[Tokens], max_n: int = 4, smooth: bool = True) -> list[float]:
    """Sentence BLEU-1..max_n: clipped n-gram precision, brevity penalty,
    cumulative geometric mean.

    With smooth=True, counts for n >= 2 get add-one smoothing (short
    single-reference captions rarely share high-order n-grams, so the
    unsmoothed score degenerates to 0).
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if not hypothesis:
        return [0.0] * max_n
    precisions = []
    for n in range(1, max_n + 1):
        hyp_counts = _ngram_counts(hypothesis, n)
        max_ref = Counter()
        for ref in references:
            for g, c in _ngram_counts(ref, n).items():
                max_ref[g] = max(max_ref[g], c)
        clipped = sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
        guess = max(0, len(hypothesis) - n + 1)
        if smooth and n >= 2:
            precisions.append((clipped + 1) / (guess + 1))
        else:
            precisions.append(clipped / guess if guess else 0.0)
    ref_len = _closest_ref_len(len(hypothesis), [len(r) for r in references])
    bp = 1.0 if len(hypothesis) > ref_len else math.exp(1 - ref_len / len(hypothesis))
    scores = []
    for n in range(1, max_n + 1):
        if any(p == 0.0 for p in precisions[:n]):
            scores.append(0.0)
        else:
            scores.append(bp * math.exp(sum(math.log(p) for p in precisions[:n]) / n))
    return scores


def corpus_bleu(hypotheses: list[Tokens], references: list[list[Tokens]], max_n: int = 4) -> list[float]:
    """Corpus BLEU-1..max_n: counts pooled over all sentences, no smoothing."""
    if len(hypotheses) != len(references):
        raise ValueError("hypotheses and references must align")
    clipped = [0] * max_n
    guess = [0] * max_n
    hyp_len_total, ref_len_total = 0, 0
    for hyp, refs in zip(hypotheses, references):
        hyp_len_total += len(hyp)
        if refs:
            ref_len_total += _closest_ref_len(len(hyp), [len(r) for r in refs])
        for n in range(1, max_n + 1):
            hyp_counts = _ngram_counts(hyp, n)
            max_ref = Counter()
            for ref in refs:
                for g, c in _ngram_counts(ref, n).items():
                    max_ref[g] = max(max_ref[g], c)
            clipped[n - 1] += sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
            guess[n - 1] += max(0, len(hyp) - n + 1)
    if hyp_len_total == 0:
        return [0.0] * max_n
    bp = 1.0 if hyp_len_total > ref_len_total else math.exp(1 - ref_len_total / hyp_len_total)
    precisions = [c / g if g else 0.0 for c, g in zip(clipped, guess)]
    scores = []
    for n in range(1, max_n + 1):
        if any(p == 0.0 for p in precisions[:n]):
            scores.append(0.0)
        else:
            scores.append(bp * math.exp(sum(math.log(p) for p in precisions[:n]) / n))
    return scores


def _lcs_len(a: Tokens, b: Tokens) -> int:
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            cur[j] = prev[j - 1] + 1 if a[i - 1] == b[j - 1] else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(hypothesis: Tokens, reference: Tokens, beta: float = 1.2) -> float:
    """LCS F-measure with recall weighted by beta."""
    if not hypothesis or not reference:
        return 0.0
    lcs = _lcs_len(hypothesis, reference)
    if lcs == 0:
        return 0.0
    p = lcs / len(hypothesis)
    r = lcs / len(reference)
    return (1 + beta**2) * p * r / (r + beta**2 * p)


def cider(
    hypotheses: list[Tokens], references: list[list[Tokens]], max_n: int = 4
) -> tuple[float, list[float], bool]:
    """Corpus CIDEr: tf-idf n-gram cosine averaged over n = 1..max_n, x10.

    Document frequency counts the samples whose reference set contains an
    n-gram; idf = log(N / df). Returns (mean score, per-sample scores,
    degenerate flag). A degenerate corpus (every idf zero) scores 0.
    """
    if len(hypotheses) != len(references):
        raise ValueError("hypotheses and references must align")
    n_samples = len(references)
    if n_samples == 0:
        return 0.0, [], True
    df: Counter = Counter()
    for refs in references:
        seen = set()
        for ref in refs:
            for n in range(1, max_n + 1):
                seen.update(_ngram_counts(ref, n))
        df.update(seen)
    log_n = math.log(n_samples)
    idf = {g: log_n - math.log(max(c, 1)) for g, c in df.items()}
    degenerate = bool(df) and all(v == 0.0 for v in idf.values())
    if degenerate:
        return 0.0, [0.0] * n_samples, True

    def tfidf_vec(tokens: Tokens, n: int) -> dict:
        # n-grams absent from the reference corpus have df clamped to 1,
        # i.e. maximal rarity log(N)
        return {g: c * idf.get(g, log_n) for g, c in _ngram_counts(tokens, n).items()}

    def cosine(u: dict, v: dict) -> float:
        nu = math.sqrt(sum(x * x for x in u.values()))
        nv = math.sqrt(sum(x * x for x in v.values()))
        if nu == 0.0 or nv == 0.0:
            return 0.0
        return sum(x * v.get(g, 0.0) for g, x in u.items()) / (nu * nv)

    per_sample = []
    for hyp, refs in zip(hypotheses, references):
        total = 0.0
        for n in range(1, max_n + 1):
            hyp_vec = tfidf_vec(hyp, n)
            sims = [cosine(hyp_vec, tfidf_vec(ref, n)) for ref in refs]
            total += sum(sims) / len(sims) if sims else 0.0
        per_sample.append(10.0 * total / max_n)
    return sum(per_sample) / n_samples, per_sample, False
