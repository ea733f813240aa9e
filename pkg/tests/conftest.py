import numpy as np
import pytest

from latte.raster import PixelGrid


def column_palette(height: int, count: int) -> list[np.ndarray]:
    """Distinct, reproducible pixel columns of the given height."""
    rng = np.random.default_rng(1234)
    palette = []
    seen = set()
    while len(palette) < count:
        col = rng.integers(0, 256, size=(height, 3), dtype=np.uint8)
        key = col.tobytes()
        if key not in seen:
            seen.add(key)
            palette.append(col)
    return palette


def grid_from_ids(ids, palette) -> PixelGrid:
    """Build an image whose columns are palette entries chosen by id."""
    cols = [palette[i] for i in ids]
    return PixelGrid(np.stack(cols, axis=1))


def random_grid(rng: np.random.Generator, height: int, width: int) -> PixelGrid:
    return PixelGrid(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240831)
