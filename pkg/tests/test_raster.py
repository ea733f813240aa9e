import numpy as np
import pytest
from PIL import Image

from latte.raster import (
    FORMULA_SPEC,
    NormalizationSpec,
    Pixel,
    PixelGrid,
    load_image,
    normalize,
    save_image,
    scale_nearest,
    transpose,
)

from .conftest import random_grid
from .oracles import nearest_downscale_loops


def test_pixel_is_white():
    assert Pixel(255, 255, 255).is_white
    assert not Pixel(255, 255, 254).is_white
    assert not Pixel(0, 0, 0).is_white


def test_pipeline_geometries():
    from latte.raster import TABLE_SPEC

    assert (FORMULA_SPEC.target_width, FORMULA_SPEC.target_height, FORMULA_SPEC.dpi) == (
        1344, 224, 240,
    )
    assert (TABLE_SPEC.target_width, TABLE_SPEC.target_height, TABLE_SPEC.dpi) == (
        1344, 672, 160,
    )


def test_grid_invariants():
    with pytest.raises(ValueError):
        PixelGrid(np.zeros((0, 3, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        PixelGrid(np.zeros((3, 0, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        PixelGrid(np.zeros((3, 3, 4), dtype=np.uint8))
    g = PixelGrid.white(2, 3)
    assert g.height == 2 and g.width == 3
    assert g.pixel(0, 0).is_white


def test_grid_is_immutable():
    g = PixelGrid.white(2, 2)
    with pytest.raises(ValueError):
        g.array[0, 0] = (0, 0, 0)


def test_load_all_white_png(tmp_path):
    path = tmp_path / "white.png"
    Image.new("RGB", (2, 2), (255, 255, 255)).save(path)
    grid = load_image(path)
    assert grid.height == 2 and grid.width == 2
    assert all(grid.pixel(y, x).is_white for y in range(2) for x in range(2))


def test_load_single_black_pixel(tmp_path):
    path = tmp_path / "black.png"
    Image.new("RGB", (1, 1), (0, 0, 0)).save(path)
    grid = load_image(path)
    assert grid.height == 1 and grid.width == 1
    assert grid.pixel(0, 0) == (0, 0, 0)


def test_alpha_composited_onto_white(tmp_path):
    path = tmp_path / "alpha.png"
    Image.new("RGBA", (1, 1), (0, 0, 0, 0)).save(path)
    assert load_image(path).pixel(0, 0).is_white


def test_save_load_round_trip(tmp_path, rng):
    grid = random_grid(rng, 3, 5)
    path = tmp_path / "grid.png"
    save_image(grid, path)
    assert load_image(path).same_pixels(grid)


def test_save_load_save_bit_identical(tmp_path, rng):
    grid = random_grid(rng, 7, 4)
    first = tmp_path / "a.png"
    second = tmp_path / "b.png"
    save_image(grid, first)
    save_image(load_image(first), second)
    assert load_image(second).same_pixels(grid)


def test_transpose_definition():
    grid = PixelGrid(np.arange(2 * 3 * 3, dtype=np.uint8).reshape(2, 3, 3))
    t = transpose(grid)
    assert t.height == 3 and t.width == 2
    for h in range(3):
        for w in range(2):
            assert t.pixel(h, w) == grid.pixel(w, h)


def test_transpose_involution(rng):
    grid = random_grid(rng, 7, 5)
    assert transpose(transpose(grid)).same_pixels(grid)
    single = PixelGrid.white(1, 1)
    assert transpose(single).same_pixels(single)


def test_normalize_identity():
    grid = PixelGrid.white(224, 1344)
    assert normalize(grid, FORMULA_SPEC) is grid


def test_normalize_pads_top_left(rng):
    grid = random_grid(rng, 100, 100)
    out = normalize(grid, FORMULA_SPEC)
    assert out.height == 224 and out.width == 1344
    assert np.array_equal(out.array[:100, :100], grid.array)
    assert np.all(out.array[100:, :] == 255)
    assert np.all(out.array[:, 100:] == 255)


def test_normalize_downscales_against_loop_oracle(rng):
    grid = random_grid(rng, 448, 2688)
    out = normalize(grid, FORMULA_SPEC)
    assert out.height == 224 and out.width == 1344
    flat = [tuple(int(v) for v in px) for row in grid.array for px in row]
    expected = nearest_downscale_loops(flat, 448, 2688, 224, 1344)
    got = [tuple(int(v) for v in px) for row in out.array for px in row]
    assert got == expected


def test_scale_nearest_small_case_matches_oracle(rng):
    grid = random_grid(rng, 9, 13)
    out = scale_nearest(grid, 5, 4)
    flat = [tuple(int(v) for v in px) for row in grid.array for px in row]
    expected = nearest_downscale_loops(flat, 9, 13, 4, 5)
    got = [tuple(int(v) for v in px) for row in out.array for px in row]
    assert got == expected


def test_normalize_idempotent(rng):
    spec = NormalizationSpec(target_width=40, target_height=30, dpi=100)
    for shape in [(10, 10), (60, 80), (30, 40), (31, 12)]:
        grid = random_grid(rng, *shape)
        once = normalize(grid, spec)
        assert normalize(once, spec).same_pixels(once)


def test_normalize_mixed_overflow(rng):
    # Wider than target but shorter: still downscaled to fit both axes.
    spec = NormalizationSpec(target_width=40, target_height=30, dpi=100)
    grid = random_grid(rng, 10, 80)
    out = normalize(grid, spec)
    assert out.height == 30 and out.width == 40
    assert np.all(out.array[5:, :] == 255)
