"""ROUGE-1/2/L and BLEU, implemented from scratch over a deterministic tokenizer.

Conventions, fixed here so reported numbers are reproducible:

* Tokenization case-folds, drops punctuation, treats each CJK character as
  one token and each non-CJK alphanumeric run as one token (same rule as
  the corpus token counter).
* ROUGE-N is recall: clipped candidate n-gram matches over the total
  reference n-gram count.
* ROUGE-L is LCS length over reference length.
* BLEU is sentence-level with clipped precisions for n = 1..min(4, |cand|),
  add-one smoothing on orders >= 2 whose raw numerator is zero, a brevity
  penalty of exp(1 - |ref|/|cand|) when the candidate is shorter than the
  reference, and 0 for an empty candidate.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .corpus import tokenize

TokenSeq = list[str]


@dataclass(frozen=True)
class ScoreSet:
    r1: float
    r2: float
    rl: float
    bleu: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.r1, self.r2, self.rl, self.bleu)

    def to_dict(self) -> dict:
        return {"r1": self.r1, "r2": self.r2, "rl": self.rl, "bleu": self.bleu}


def metric_tokenize(text: str) -> TokenSeq:
    """Case-folded tokens under the package token rule."""
    return tokenize(text.casefold())


def ngram_counts(tokens: TokenSeq, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: TokenSeq, reference: TokenSeq, n: int) -> float:
    """Clipped n-gram recall against the reference; 0 when the reference
    has no n-grams."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ref_counts = ngram_counts(reference, n)
    total = sum(ref_counts.values())
    if total == 0:
        return 0.0
    cand_counts = ngram_counts(candidate, n)
    matched = sum(min(count, cand_counts[gram]) for gram, count in ref_counts.items())
    return matched / total


def lcs_length(a: TokenSeq, b: TokenSeq) -> int:
    """Longest common subsequence length, O(|a|*|b|) with two rows."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(candidate: TokenSeq, reference: TokenSeq) -> float:
    if not reference:
        return 0.0
    return lcs_length(candidate, reference) / len(reference)


def bleu(candidate: TokenSeq, reference: TokenSeq, max_n: int = 4) -> float:
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if not candidate:
        return 0.0
    log_sum = 0.0
    orders = range(1, min(max_n, len(candidate)) + 1)
    for n in orders:
        cand_counts = ngram_counts(candidate, n)
        ref_counts = ngram_counts(reference, n)
        matched = sum(
            min(count, ref_counts[gram]) for gram, count in cand_counts.items()
        )
        total = sum(cand_counts.values())
        if matched == 0:
            if n == 1:
                return 0.0
            matched, total = matched + 1, total + 1  # add-one smoothing
        log_sum += math.log(matched / total)
    geo_mean = math.exp(log_sum / len(orders))
    if len(candidate) < len(reference):
        bp = math.exp(1.0 - len(reference) / len(candidate))
    else:
        bp = 1.0
    return bp * geo_mean


def score_pair(candidate_text: str, reference_text: str) -> ScoreSet:
    """Tokenize both texts and compute all four metrics."""
    cand = metric_tokenize(candidate_text)
    ref = metric_tokenize(reference_text)
    return ScoreSet(
        r1=rouge_n(cand, ref, 1),
        r2=rouge_n(cand, ref, 2),
        rl=rouge_l(cand, ref),
        bleu=bleu(cand, ref),
    )
