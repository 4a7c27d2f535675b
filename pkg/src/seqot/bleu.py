"""Sentence- and corpus-level BLEU.

Standard clipped n-gram precision BLEU: geometric mean of precisions for
n = 1..max_n times the brevity penalty exp(min(0, 1 - r/c)).  At sentence
level, zero higher-order precisions are floored at 1e-9 so that short toy
sentences do not degenerate to 0; a hypothesis with no unigram overlap
still scores exactly 0.  Corpus-level aggregation uses no smoothing.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Sequence

__all__ = ["bleu_n", "corpus_bleu", "SMOOTH_EPS"]

#: Sentence-level floor for zero n-gram precisions (n >= 2).
SMOOTH_EPS = 1e-9


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_counts(
    hypothesis: Sequence[str], references: list[Sequence[str]], n: int
) -> tuple[int, int]:
    """(clipped matches, total hypothesis n-grams) at order n."""
    total = max(len(hypothesis) - n + 1, 0)
    if total == 0:
        return 0, 0
    hyp_counts = _ngrams(hypothesis, n)
    max_ref: Counter = Counter()
    for ref in references:
        for gram, count in _ngrams(ref, n).items():
            if count > max_ref[gram]:
                max_ref[gram] = count
    clipped = sum(min(count, max_ref[gram]) for gram, count in hyp_counts.items())
    return clipped, total


def _closest_ref_length(hyp_len: int, references: list[Sequence[str]]) -> int:
    # closest reference length; ties go to the shorter one
    return min((abs(len(r) - hyp_len), len(r)) for r in references)[1]


def _brevity_penalty(ref_len: int, hyp_len: int) -> float:
    return math.exp(min(0.0, 1.0 - ref_len / hyp_len))


def bleu_n(
    hypothesis: Sequence[str],
    references: list[Sequence[str]],
    max_n: int = 4,
) -> float:
    """Sentence BLEU with orders 1..max_n against one or more references.

    Deterministic: identical inputs give identical output.  An empty
    hypothesis scores 0.0 (not an error), as does any hypothesis without
    a single unigram match.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if not references:
        raise ValueError("need at least one reference")
    hyp = list(hypothesis)
    refs = [list(r) for r in references]
    if not hyp:
        return 0.0

    log_precisions = []
    for n in range(1, max_n + 1):
        clipped, total = _clipped_counts(hyp, refs, n)
        if n == 1 and clipped == 0:
            return 0.0
        p = clipped / total if total > 0 and clipped > 0 else SMOOTH_EPS
        log_precisions.append(math.log(p))
    bp = _brevity_penalty(_closest_ref_length(len(hyp), refs), len(hyp))
    return bp * math.exp(sum(log_precisions) / max_n)


def corpus_bleu(
    hypotheses: list[Sequence[str]],
    references: list[list[Sequence[str]]],
    max_n: int = 4,
) -> float:
    """Corpus BLEU: precisions aggregated over all pairs, no smoothing.

    ``references[i]`` is the list of references for ``hypotheses[i]``.
    Returns 0.0 when any aggregate precision up to max_n is zero or the
    corpus is empty of hypothesis tokens.
    """
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    if len(hypotheses) != len(references):
        raise ValueError(
            f"{len(hypotheses)} hypotheses vs {len(references)} reference sets"
        )
    if not hypotheses:
        raise ValueError("empty corpus")

    hyp_len = 0
    ref_len = 0
    clipped_total = [0] * max_n
    grams_total = [0] * max_n
    for hyp, refs in zip(hypotheses, references):
        if not refs:
            raise ValueError("need at least one reference per hypothesis")
        hyp = list(hyp)
        refs = [list(r) for r in refs]
        hyp_len += len(hyp)
        if hyp:
            ref_len += _closest_ref_length(len(hyp), refs)
        for n in range(1, max_n + 1):
            clipped, total = _clipped_counts(hyp, refs, n)
            clipped_total[n - 1] += clipped
            grams_total[n - 1] += total

    if hyp_len == 0:
        return 0.0
    if any(c == 0 or t == 0 for c, t in zip(clipped_total, grams_total)):
        return 0.0
    log_sum = sum(
        math.log(c / t) for c, t in zip(clipped_total, grams_total)
    )
    return _brevity_penalty(ref_len, hyp_len) * math.exp(log_sum / max_n)
