"""Raster image representation, PNG IO, and resize/pad normalization.

Images are 8-bit RGB grids stored row-major in a numpy array. White
(255,255,255) is the universal background of rendered LaTeX, so alpha
channels are composited onto white at load time and padding is always
white.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image

WHITE = (255, 255, 255)


class Pixel(NamedTuple):
    r: int
    g: int
    b: int

    @property
    def is_white(self) -> bool:
        return self == (255, 255, 255)


@dataclass(frozen=True)
class PixelGrid:
    """Immutable H x W RGB raster. ``array`` has shape (height, width, 3), uint8."""

    array: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.array, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"grid must be at least 1x1, got {arr.shape[0]}x{arr.shape[1]}")
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        object.__setattr__(self, "array", arr)

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @property
    def width(self) -> int:
        return self.array.shape[1]

    def pixel(self, row: int, col: int) -> Pixel:
        return Pixel(*(int(v) for v in self.array[row, col]))

    def same_pixels(self, other: "PixelGrid") -> bool:
        return self.array.shape == other.array.shape and bool(
            np.array_equal(self.array, other.array)
        )

    @classmethod
    def white(cls, height: int, width: int) -> "PixelGrid":
        return cls(np.full((height, width, 3), 255, dtype=np.uint8))

    @classmethod
    def from_rows(cls, rows) -> "PixelGrid":
        """Build from a nested sequence of (r, g, b) triples, row-major."""
        return cls(np.asarray(rows, dtype=np.uint8))


@dataclass(frozen=True)
class NormalizationSpec:
    target_width: int
    target_height: int
    dpi: int


# The two raster geometries used by the pipeline.
FORMULA_SPEC = NormalizationSpec(target_width=1344, target_height=224, dpi=240)
TABLE_SPEC = NormalizationSpec(target_width=1344, target_height=672, dpi=160)


def load_image(path: str | Path) -> PixelGrid:
    """Read a PNG into a PixelGrid, compositing any alpha channel onto white."""
    with Image.open(path) as img:
        if img.mode in ("RGBA", "LA", "PA") or (img.mode == "P" and "transparency" in img.info):
            rgba = img.convert("RGBA")
            background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
            img = Image.alpha_composite(background, rgba).convert("RGB")
        else:
            img = img.convert("RGB")
        return PixelGrid(np.asarray(img, dtype=np.uint8))


def save_image(grid: PixelGrid, path: str | Path) -> None:
    """Write a lossless PNG; round-trips bit-exactly with load_image."""
    Image.fromarray(np.asarray(grid.array), mode="RGB").save(path, format="PNG")


def transpose(grid: PixelGrid) -> PixelGrid:
    """Swap rows and columns: output[h][w] == input[w][h]."""
    return PixelGrid(np.transpose(grid.array, (1, 0, 2)))


def scale_nearest(grid: PixelGrid, out_width: int, out_height: int) -> PixelGrid:
    """Nearest-neighbor resample via pixel-center mapping.

    Nearest-neighbor keeps the binary ink/white character of rendered
    LaTeX; interpolating filters would introduce gray pixels that defeat
    exact column comparison downstream.
    """
    if out_width < 1 or out_height < 1:
        raise ValueError("output dimensions must be positive")
    src = grid.array
    rows = np.minimum(
        ((np.arange(out_height) + 0.5) * grid.height / out_height).astype(np.int64),
        grid.height - 1,
    )
    cols = np.minimum(
        ((np.arange(out_width) + 0.5) * grid.width / out_width).astype(np.int64),
        grid.width - 1,
    )
    return PixelGrid(src[np.ix_(rows, cols)])


def normalize(grid: PixelGrid, spec: NormalizationSpec) -> PixelGrid:
    """Fit a grid into spec.target_width x spec.target_height.

    Content that already fits is anchored top-left and padded with white;
    oversized content is downscaled preserving aspect ratio, then padded.
    Idempotent: a grid already at the target dimensions is returned as-is.
    """
    tw, th = spec.target_width, spec.target_height
    if grid.width == tw and grid.height == th:
        return grid
    if grid.width > tw or grid.height > th:
        ratio = min(tw / grid.width, th / grid.height)
        new_w = max(1, int(grid.width * ratio))
        new_h = max(1, int(grid.height * ratio))
        grid = scale_nearest(grid, new_w, new_h)
    canvas = np.full((th, tw, 3), 255, dtype=np.uint8)
    canvas[: grid.height, : grid.width] = grid.array
    return PixelGrid(canvas)
