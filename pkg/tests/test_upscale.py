"""Tile planning and stitched-upscale equivalence."""

from __future__ import annotations

import numpy as np
import pytest

from sitblend.errors import TileFnError, TilePlanError
from sitblend.resample import resample
from sitblend.upscale import (
    DEFAULT_FACTOR,
    DEFAULT_GRID,
    DEFAULT_OVERLAP,
    plan_tiles,
    upscale_tiled,
)


# ---------------------------------------------------------------------------
# planning


def test_default_plan_is_64_tiles():
    tiles = plan_tiles((512, 512))
    assert len(tiles) == 64
    assert {t.index for t in tiles} == {(r, c) for r in range(8) for c in range(8)}
    assert all(t.core[2] - t.core[0] == 64 and t.core[3] - t.core[1] == 64
               for t in tiles)
    # interior expanded tiles are 96x96 with the default 16 px overlap
    interior = [t for t in tiles if 0 < t.index[0] < 7 and 0 < t.index[1] < 7]
    assert all(t.expanded[2] - t.expanded[0] == 96 and
               t.expanded[3] - t.expanded[1] == 96 for t in interior)


def test_cores_partition_exactly():
    for size in [(512, 512), (100, 100), (97, 53), (8, 8)]:
        tiles = plan_tiles(size)
        cover = np.zeros((size[1], size[0]), dtype=np.int64)
        for t in tiles:
            x0, y0, x1, y1 = t.core
            cover[y0:y1, x0:x1] += 1
        assert (cover == 1).all(), size


def test_plan_remainder_lands_in_last_row_col():
    tiles = plan_tiles((100, 100))
    widths = {t.index[1]: t.core[2] - t.core[0] for t in tiles}
    assert all(widths[c] == 13 for c in range(7))
    assert widths[7] == 9


def test_plan_rejects_bad_inputs():
    with pytest.raises(TilePlanError):
        plan_tiles((0, 100))
    with pytest.raises(TilePlanError):
        plan_tiles((100, 100), grid=(0, 8))
    with pytest.raises(TilePlanError):
        plan_tiles((100, 100), overlap=-1)
    with pytest.raises(TilePlanError, match="too fine"):
        plan_tiles((4, 4), grid=(8, 8))


def test_expanded_clipped_to_image():
    for t in plan_tiles((64, 64), grid=(4, 4), overlap=16):
        ex0, ey0, ex1, ey1 = t.expanded
        assert 0 <= ex0 <= ex1 <= 64
        assert 0 <= ey0 <= ey1 <= 64


# ---------------------------------------------------------------------------
# stitching


def test_output_dims_are_exact_multiples():
    img = np.zeros((53, 97), dtype=np.uint8)
    out = upscale_tiled(img, factor=4, grid=(3, 3), overlap=8)
    assert out.shape == (53 * 4, 97 * 4)


def test_matches_whole_image_bicubic():
    rng = np.random.default_rng(3)
    for shape in [(64, 64), (96, 128, 3), (100, 100)]:
        img = rng.integers(0, 256, shape).astype(np.uint8)
        tiled = upscale_tiled(img, factor=4, grid=(4, 4), overlap=12)
        whole = resample(img, 4, method="bicubic")
        diff = np.abs(tiled.astype(np.int64) - whole.astype(np.int64))
        assert diff.max() <= 2, shape


def test_constant_image_survives_exactly():
    img = np.full((80, 80), 137, dtype=np.uint8)
    out = upscale_tiled(img, factor=2, grid=(4, 4))
    assert (out == 137).all()


def test_weight_sum_covers_without_overshoot():
    # edge trimming dents the pre-normalization sum below 1 near tile
    # boundaries; what must hold is full coverage and no over-counting
    img = np.zeros((64, 64), dtype=np.uint8)
    res = upscale_tiled(img, factor=2, grid=(4, 4), overlap=8,
                        instrumentation=True)
    assert res.weight_sum.min() > 0
    assert res.weight_sum.max() <= 1 + 1e-9
    # with no trim the complementary ramps do sum to exactly one
    res = upscale_tiled(img, factor=2, grid=(4, 4), overlap=8,
                        edge_trim=0, instrumentation=True)
    assert np.allclose(res.weight_sum, 1.0, atol=1e-9)


def test_custom_tile_fn_is_used():
    calls = []

    def doubler(tile, factor):
        calls.append(tile.shape)
        return resample(tile, factor, method="nearest")

    img = np.full((32, 32), 10, dtype=np.uint8)
    out = upscale_tiled(img, factor=2, grid=(2, 2), overlap=4, tile_fn=doubler)
    assert len(calls) == 4
    assert (out == 10).all()


def test_tile_fn_failure_names_the_tile():
    def explode(tile, factor):
        raise RuntimeError("boom")

    with pytest.raises(TileFnError) as err:
        upscale_tiled(np.zeros((32, 32), np.uint8), factor=2, grid=(2, 2),
                      tile_fn=explode)
    assert err.value.tile_index == (0, 0)
    assert "boom" in str(err.value)


def test_tile_fn_wrong_shape_rejected():
    def shrug(tile, factor):
        return tile  # ignores factor

    with pytest.raises(TileFnError, match="expected"):
        upscale_tiled(np.zeros((32, 32), np.uint8), factor=2, grid=(2, 2),
                      tile_fn=shrug)


def test_edge_trim_validation():
    img = np.zeros((32, 32), dtype=np.uint8)
    with pytest.raises(TilePlanError, match="edge_trim"):
        upscale_tiled(img, factor=2, grid=(2, 2), overlap=4, edge_trim=5)
    out = upscale_tiled(img, factor=2, grid=(2, 2), overlap=4, edge_trim=0)
    assert out.shape == (64, 64)


def test_factor_validation():
    img = np.zeros((16, 16), dtype=np.uint8)
    with pytest.raises(TilePlanError):
        upscale_tiled(img, factor=0)
    with pytest.raises(TilePlanError):
        upscale_tiled(img, factor=2.5)
    with pytest.raises(TilePlanError):
        upscale_tiled(np.zeros(16, dtype=np.uint8), factor=2)


def test_factor_one_round_trips():
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, (40, 40), dtype=np.uint8)
    out = upscale_tiled(img, factor=1, grid=(2, 2), overlap=4)
    assert np.array_equal(out, img)


def test_defaults_frozen():
    assert DEFAULT_GRID == (8, 8)
    assert DEFAULT_OVERLAP == 16
    assert DEFAULT_FACTOR == 4
