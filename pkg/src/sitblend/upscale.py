"""Tile-based upscaling with overlap feathering.

The image is cut into a grid of core tiles (ceil-division; the last row and
column absorb the remainder). Each tile is expanded by ``overlap`` source
pixels per side (clipped at the image border), upscaled independently, and
the results are blended back together with complementary linear ramps
across each pairwise overlap band, accumulated as value*weight / weight.

Where a tile was expanded (i.e. its edge is interior, not the true image
border), the per-tile upscaler sees a clamped boundary that the whole-image
upscaler would not, so the outermost ``edge_trim`` source pixels of such
sides get weight zero and the neighbouring tile's exact values take over.
With the default trim of min(2, overlap) every contribution equals what a
whole-image bicubic would produce, and the stitched result matches it to
within rounding.

``tile_fn(tile, factor) -> upscaled`` makes the per-tile transform
pluggable (a backend-served upscaler slots in here); the default is the
local bicubic resampler.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import TileFnError, TilePlanError
from .resample import resample

DEFAULT_GRID = (8, 8)
DEFAULT_OVERLAP = 16
DEFAULT_FACTOR = 4


@dataclass(frozen=True)
class Tile:
    index: tuple      # (row, col)
    core: tuple       # (x0, y0, x1, y1) source px, exclusive
    expanded: tuple   # core grown by overlap, clipped to the image


@dataclass(frozen=True)
class UpscaleResult:
    pixels: np.ndarray
    weight_sum: np.ndarray  # pre-normalization accumulated weights, ~1.0


def plan_tiles(size: tuple, grid: tuple = DEFAULT_GRID,
               overlap: int = DEFAULT_OVERLAP) -> list:
    """Split (width, height) into grid=(rows, cols) tiles.

    Cores partition the image exactly. A grid finer than the image (some
    tile would start past the edge) is an error rather than a silent
    degenerate plan.
    """
    w, h = int(size[0]), int(size[1])
    rows, cols = int(grid[0]), int(grid[1])
    if w < 1 or h < 1:
        raise TilePlanError(f"image size must be positive, got {size}")
    if rows < 1 or cols < 1:
        raise TilePlanError(f"grid must be at least 1x1, got {grid}")
    if overlap < 0:
        raise TilePlanError(f"overlap must be >= 0, got {overlap}")

    tile_w = -(-w // cols)  # ceil division
    tile_h = -(-h // rows)
    tiles = []
    for r in range(rows):
        y0 = r * tile_h
        y1 = min(y0 + tile_h, h)
        if y0 >= y1:
            raise TilePlanError(
                f"grid {rows}x{cols} too fine for {w}x{h}: row {r} is empty"
            )
        for c in range(cols):
            x0 = c * tile_w
            x1 = min(x0 + tile_w, w)
            if x0 >= x1:
                raise TilePlanError(
                    f"grid {rows}x{cols} too fine for {w}x{h}: column {c} is empty"
                )
            expanded = (
                max(0, x0 - overlap), max(0, y0 - overlap),
                min(w, x1 + overlap), min(h, y1 + overlap),
            )
            tiles.append(Tile(index=(r, c), core=(x0, y0, x1, y1), expanded=expanded))
    return tiles


def default_tile_fn(tile: np.ndarray, factor: int) -> np.ndarray:
    return resample(tile, factor, method="bicubic")


def upscale_tiled(image: np.ndarray, factor: int = DEFAULT_FACTOR,
                  grid: tuple = DEFAULT_GRID, overlap: int = DEFAULT_OVERLAP,
                  tile_fn: Optional[Callable] = None,
                  edge_trim: Optional[int] = None,
                  instrumentation: bool = False):
    """Upscale by an integer factor, tile by tile.

    Returns the stitched array, or an UpscaleResult carrying the
    pre-normalization weight field when ``instrumentation`` is set.
    """
    arr = np.asarray(image)
    if arr.ndim not in (2, 3):
        raise TilePlanError(f"expected 2-D or 3-D image, got shape {arr.shape}")
    if factor != int(factor) or factor < 1:
        raise TilePlanError(f"factor must be a positive integer, got {factor}")
    factor = int(factor)
    h, w = arr.shape[:2]
    tiles = plan_tiles((w, h), grid=grid, overlap=overlap)
    if edge_trim is None:
        edge_trim = min(2, overlap)
    if not 0 <= edge_trim <= overlap:
        raise TilePlanError(
            f"edge_trim must be in [0, overlap={overlap}], got {edge_trim}"
        )
    fn = tile_fn or default_tile_fn

    out_shape = (h * factor, w * factor) + arr.shape[2:]
    acc = np.zeros(out_shape, dtype=np.float64)
    wsum = np.zeros((h * factor, w * factor), dtype=np.float64)

    for tile in tiles:
        ex0, ey0, ex1, ey1 = tile.expanded
        sub = arr[ey0:ey1, ex0:ex1]
        try:
            up = np.asarray(fn(sub, factor), dtype=np.float64)
        except Exception as exc:
            raise TileFnError(
                f"tile {tile.index} transform raised: {exc}", tile_index=tile.index
            ) from exc
        want = ((ey1 - ey0) * factor, (ex1 - ex0) * factor)
        if up.shape[:2] != want:
            raise TileFnError(
                f"tile {tile.index} transform returned {up.shape[:2]}, expected {want}",
                tile_index=tile.index,
            )
        wx = _axis_profile(ex0, ex1, tile.core[0], tile.core[2], w, overlap, factor, edge_trim)
        wy = _axis_profile(ey0, ey1, tile.core[1], tile.core[3], h, overlap, factor, edge_trim)
        weight = wy[:, None] * wx[None, :]
        if arr.ndim == 3:
            acc[ey0 * factor:ey1 * factor, ex0 * factor:ex1 * factor] += up * weight[:, :, None]
        else:
            acc[ey0 * factor:ey1 * factor, ex0 * factor:ex1 * factor] += up * weight
        wsum[ey0 * factor:ey1 * factor, ex0 * factor:ex1 * factor] += weight

    if wsum.min() <= 0:
        raise TilePlanError(
            "stitch left uncovered pixels; overlap/edge_trim combination is too aggressive"
        )
    out = acc / (wsum[:, :, None] if arr.ndim == 3 else wsum)
    if arr.dtype == np.uint8:
        out = np.round(np.clip(out, 0, 255)).astype(np.uint8)
    result = out
    if instrumentation:
        return UpscaleResult(pixels=result, weight_sum=wsum)
    return result


def _axis_profile(e0: int, e1: int, c0: int, c1: int, full: int,
                  overlap: int, factor: int, trim: int) -> np.ndarray:
    """Feather weights along one axis of one expanded tile, output scale.

    Across the band where two neighbouring expanded tiles both cover the
    image, this tile ramps (d+1)/(n+1) up (left side) or (n-d)/(n+1) down
    (right side); the two ramps are complementary, so pre-normalization
    weights already sum to 1 there.
    """
    n = (e1 - e0) * factor
    profile = np.ones(n, dtype=np.float64)
    j = np.arange(n, dtype=np.float64)

    if c0 > 0:
        lext = c0 - e0
        rext_prev = min(overlap, full - c0)
        band = (lext + rext_prev) * factor
        if band > 0:
            profile *= np.minimum((j + 1.0) / (band + 1.0), 1.0)
    if c1 < full:
        rext = e1 - c1
        lext_next = min(overlap, c1)
        band = (lext_next + rext) * factor
        start = (c1 - lext_next - e0) * factor
        if band > 0:
            d = j - start
            down = np.where(d >= 0, (band - d) / (band + 1.0), 1.0)
            profile *= np.minimum(down, 1.0)

    # interior expanded edges saw a clamped border the full image would not
    if e0 > 0 and trim > 0:
        profile[: min(trim, c0 - e0) * factor] = 0.0
    if e1 < full and trim > 0:
        cut = min(trim, e1 - c1) * factor
        if cut > 0:
            profile[n - cut:] = 0.0
    return profile
