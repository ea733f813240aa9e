#!/usr/bin/env python3
"""Walkthrough: the full generate -> render -> compare -> localize ->
refine loop against a scripted mock backend.

The mock's first draft drops one token; the scripted localization points
at the first bad token and the scripted refinement supplies the correct
suffix, so the loop converges in round two. A fixture renderer stands in
for the TeX toolchain so the demo runs anywhere.
"""

import json
from pathlib import Path

import numpy as np

from latte import FORMULA, MockBackend, PixelGrid, recognize, tokenize
from latte.render import FixtureRenderer

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(42)
gt_arr = np.full((224, 1344, 3), 255, dtype=np.uint8)
gt_arr[60:100, 100:400] = rng.integers(0, 100, size=(40, 300, 3))
gt_image = PixelGrid(gt_arr)

wrong_arr = gt_arr.copy()
wrong_arr[60:100, 250:300] = 255
wrong_image = PixelGrid(wrong_arr)

correct_src = "\\frac{a}{b}+c"
wrong_src = "\\frac{a}{b}"

renderer = FixtureRenderer({correct_src: gt_image, wrong_src: wrong_image})

gt_tokens = list(tokenize(correct_src))
wrong_tokens = list(tokenize(wrong_src))
fault = next(
    (i for i, (a, b) in enumerate(zip(wrong_tokens, gt_tokens)) if a != b), len(wrong_tokens)
)
backend = MockBackend(
    [
        {"role": "generate", "match": 0, "response": {"latex": wrong_src}},
        {"role": "localize", "match": 0, "response": {"index": fault}},
        {"role": "refine", "match": 0, "response": {"completion_tokens": gt_tokens[fault:]}},
    ]
)

trace = recognize(gt_image, FORMULA, backend, budget=4, renderer=renderer)

print(f"status : {trace.status.value}")
for record in trace.rounds:
    line = f"round {record.round}: {record.candidate.raw!r} matched={record.matched}"
    if record.fault is not None:
        line += f" fault@{record.fault.index}"
    if record.delta_stats:
        line += f" delta={record.delta_stats['distance']}"
    print(line)
print(f"backend calls: {backend.call_counts()}")

trace_path = OUT / "trace.json"
trace_path.write_text(json.dumps(trace.to_dict(), indent=2, sort_keys=True))
print(f"wrote {trace_path}")
