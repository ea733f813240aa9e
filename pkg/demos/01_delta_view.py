#!/usr/bin/env python3
"""Walkthrough: diff two images column-by-column and render the annotated
delta view.

We fabricate a "ground truth" image and a "rendered" image that disagree
in a few places: some columns replaced, a run of columns missing, a run
of extra columns. The delta view marks replaced/missing ground-truth
columns on a light-red background (missing ink in pure red) and
extra/replaced rendered columns on light blue (extra ink in pure blue).
"""

from pathlib import Path

import numpy as np

from latte import PixelGrid, compose_model_view, delta_view, save_image

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)


def synthetic_strip(width: int, seed: int) -> np.ndarray:
    """A white strip with a few black 'glyph' boxes."""
    rng = np.random.default_rng(seed)
    arr = np.full((40, width, 3), 255, dtype=np.uint8)
    x = 4
    while x < width - 10:
        w = int(rng.integers(3, 9))
        y = int(rng.integers(4, 20))
        h = int(rng.integers(8, 16))
        arr[y : y + h, x : x + w] = 0
        x += w + int(rng.integers(4, 10))
    return arr


gt_arr = synthetic_strip(200, seed=7)

rendered_arr = gt_arr.copy()
rendered_arr[:, 60:70] = synthetic_strip(200, seed=8)[:, 60:70]   # substituted glyph
rendered_arr = np.concatenate(                                     # extra columns
    [rendered_arr[:, :120], synthetic_strip(24, seed=9), rendered_arr[:, 120:]], axis=1
)
rendered_arr = np.delete(rendered_arr, np.s_[160:175], axis=1)     # missing columns
rendered_arr = rendered_arr[:, :200]

gt = PixelGrid(gt_arr)
rendered = PixelGrid(rendered_arr[:, :200])

dv = delta_view(gt, rendered)
print(f"orientation      : {dv.orientation.value}")
print(f"column edits     : {dv.distance}")
print(f"edit percentage  : {dv.edit_percentage:.3f}")
print(f"operation blocks : {dv.script.run_length_counts()}")

save_image(gt, OUT / "delta_gt.png")
save_image(rendered, OUT / "delta_rendered.png")
save_image(compose_model_view(dv), OUT / "delta_view.png")
print(f"wrote {OUT / 'delta_view.png'}")
