#!/usr/bin/env python3
"""Walkthrough: the three evaluation metrics on a miniature example.

exact match is pixel-level equality; the edit score folds the column
edit distance into [0, 1]; BLEU-4 compares token sequences of the
candidate and reference sources.
"""

import numpy as np

from latte import PixelGrid, bleu4, edit_score, evaluate, exact_match, tokenize

rng = np.random.default_rng(5)
gt_arr = np.full((16, 48, 3), 255, dtype=np.uint8)
gt_arr[4:12, 8:40] = rng.integers(0, 64, size=(8, 32, 3))
gt = PixelGrid(gt_arr)

perfect = PixelGrid(gt_arr.copy())
off_by_a_bit = gt_arr.copy()
off_by_a_bit[:, 20:24] = 255
imperfect = PixelGrid(off_by_a_bit)

print("perfect render  :", exact_match(gt, perfect), f"edit={edit_score(gt, perfect):.3f}")
print("imperfect render:", exact_match(gt, imperfect), f"edit={edit_score(gt, imperfect):.3f}")

reference = tokenize("\\frac{a}{b} + \\sqrt{x}")
candidate = tokenize("\\frac{a}{b} + \\sqrt{y}")
print(f"\nBLEU-4 exact     : {bleu4(reference, reference):.4f}")
print(f"BLEU-4 near miss : {bleu4(candidate, reference):.4f}")

report = evaluate(gt, imperfect, candidate, reference)
print(
    f"\nfull report      : match={report.match} edit={report.edit_score:.3f} "
    f"bleu4={report.bleu4:.3f} distance={report.distance}"
)
