"""Brute-force metric oracles, written independently of opcap.metrics.

Everything here favors obviousness over speed: explicit loops, dense
vocabulary-indexed vectors, recursion where the definition recurses.
"""

import math
from functools import lru_cache

import numpy as np


def all_ngrams(tokens, n):
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def bleu_oracle(hyp, refs, max_n=4, smooth=True):
    hyp = list(hyp)
    if len(hyp) == 0:
        return [0.0] * max_n
    precisions = []
    for n in range(1, max_n + 1):
        grams = all_ngrams(hyp, n)
        clipped = 0
        for g in set(grams):
            count_hyp = sum(1 for x in grams if x == g)
            best_ref = max((sum(1 for x in all_ngrams(list(r), n) if x == g) for r in refs), default=0)
            clipped += min(count_hyp, best_ref)
        total = len(grams)
        if smooth and n >= 2:
            precisions.append((clipped + 1) / (total + 1))
        else:
            precisions.append(clipped / total if total else 0.0)
    # brevity penalty against the closest reference length (ties -> shorter)
    best = None
    for r in refs:
        cand = (abs(len(r) - len(hyp)), len(r))
        if best is None or cand < best:
            best = cand
    ref_len = best[1]
    bp = 1.0 if len(hyp) > ref_len else math.exp(1 - ref_len / len(hyp))
    out = []
    for n in range(1, max_n + 1):
        prod = 1.0
        for p in precisions[:n]:
            prod *= p
        out.append(bp * prod ** (1.0 / n) if prod > 0 else 0.0)
    return out


def lcs_oracle(a, b):
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == 0 or j == 0:
            return 0
        if a[i - 1] == b[j - 1]:
            return rec(i - 1, j - 1) + 1
        return max(rec(i - 1, j), rec(i, j - 1))

    return rec(len(a), len(b))


def rouge_l_oracle(hyp, ref, beta=1.2):
    if not hyp or not ref:
        return 0.0
    lcs = lcs_oracle(hyp, ref)
    if lcs == 0:
        return 0.0
    p, r = lcs / len(hyp), lcs / len(ref)
    return (1 + beta * beta) * p * r / (r + beta * beta * p)


def cider_oracle(hyps, refs_list, max_n=4):
    """Dense tf-idf vectors over the explicit n-gram vocabulary, numpy cosine."""
    n_samples = len(refs_list)
    vocab_per_n = []
    for n in range(1, max_n + 1):
        grams = set()
        for refs in refs_list:
            for r in refs:
                grams.update(all_ngrams(list(r), n))
        for h in hyps:
            grams.update(all_ngrams(list(h), n))
        vocab_per_n.append(sorted(grams))

    idf_per_n = []
    for n in range(1, max_n + 1):
        idf = {}
        for g in vocab_per_n[n - 1]:
            df = sum(1 for refs in refs_list if any(g in all_ngrams(list(r), n) for r in refs))
            idf[g] = math.log(n_samples) - math.log(max(df, 1))
        idf_per_n.append(idf)

    def vec(tokens, n):
        grams = all_ngrams(list(tokens), n)
        v = np.zeros(len(vocab_per_n[n - 1]))
        for i, g in enumerate(vocab_per_n[n - 1]):
            v[i] = grams.count(g) * idf_per_n[n - 1][g]
        return v

    per_sample = []
    for hyp, refs in zip(hyps, refs_list):
        total = 0.0
        for n in range(1, max_n + 1):
            hv = vec(hyp, n)
            sims = []
            for r in refs:
                rv = vec(r, n)
                denom = np.linalg.norm(hv) * np.linalg.norm(rv)
                sims.append(float(hv @ rv / denom) if denom > 0 else 0.0)
            total += sum(sims) / len(sims) if sims else 0.0
        per_sample.append(10.0 * total / max_n)
    return sum(per_sample) / n_samples if n_samples else 0.0, per_sample
