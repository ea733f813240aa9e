"""Evaluation metrics: exact pixel match, column edit score, BLEU-4."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .imagediff import wagner_fischer_star
from .raster import PixelGrid


@dataclass(frozen=True)
class EvalReport:
    match: bool
    edit_score: float
    bleu4: float
    distance: int


def exact_match(gt: PixelGrid, rendered: PixelGrid) -> bool:
    """True iff dimensions and every pixel value agree."""
    return gt.same_pixels(rendered)


def edit_score(gt: PixelGrid, rendered: PixelGrid) -> float:
    """1 - (column edit distance / max width), clamped to [0, 1].

    The max-width denominator keeps the score in range when the rendered
    image is wider than the ground truth.
    """
    distance = wagner_fischer_star(gt, rendered).distance
    score = 1.0 - distance / max(gt.width, rendered.width)
    return min(1.0, max(0.0, score))


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Sentence BLEU with uniform 1..4-gram weights and brevity penalty.

    No smoothing: any zero n-gram precision (including candidates shorter
    than four tokens) scores 0. Empty candidates score 0.
    """
    candidate = list(candidate)
    reference = list(reference)
    if not candidate:
        return 0.0
    log_precision_sum = 0.0
    for n in range(1, 5):
        cand_counts = _ngram_counts(candidate, n)
        total = sum(cand_counts.values())
        if total == 0:
            return 0.0
        ref_counts = _ngram_counts(reference, n)
        clipped = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        if clipped == 0:
            return 0.0
        log_precision_sum += 0.25 * math.log(clipped / total)
    if len(candidate) >= len(reference):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(reference) / len(candidate))
    return brevity * math.exp(log_precision_sum)


def evaluate(
    gt: PixelGrid,
    rendered: PixelGrid,
    candidate_tokens: Sequence[str],
    reference_tokens: Sequence[str],
) -> EvalReport:
    """Full per-sample report; images must share a height (normalize first)."""
    distance = wagner_fischer_star(gt, rendered).distance
    score = min(1.0, max(0.0, 1.0 - distance / max(gt.width, rendered.width)))
    return EvalReport(
        match=exact_match(gt, rendered),
        edit_score=score,
        bleu4=bleu4(candidate_tokens, reference_tokens),
        distance=distance,
    )
