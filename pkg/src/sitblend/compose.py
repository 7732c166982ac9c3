"""Placing a chart control map into background space and mixing the maps.

Placement scales the chart so its height is ``relative_scale`` of the
background height, anchors it, and clamps both scale and offset so the
placed rectangle always fits (the ``clamped`` flag records when that
happened). Binary maps travel through nearest-neighbour resampling so they
stay strictly two-valued; graded maps go through bilinear.

Mixing has two modes: additive keeps only the chart's outline (the
environment reaches the generator through the raw-image control unit, not
the outline), while blend folds the background's own edge map in as well,
trading chart fidelity for integration.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import ndimage

from .control import ControlKind
from .errors import PlacementError
from .resample import resample_to, scaled_size

ANCHORS = ("center", "top_left", "top_right", "bottom_left", "bottom_right")

DEFAULT_RELATIVE_SCALE = 0.6

# strictly binary map kinds keep nearest-neighbour resampling
_BINARY_KINDS = {ControlKind.CANNY, ControlKind.SCRIBBLE}


class ComposeMode(str, Enum):
    ADDITIVE = "additive"
    BLEND = "blend"


@dataclass(frozen=True)
class PlacementTransform:
    """Affine chart-to-background mapping: bg = chart * scale + offset."""

    scale: float
    offset: tuple       # (x, y) px, top-left of the placed rect
    chart_size: tuple   # source (w, h)
    placed_size: tuple  # (w, h) after scaling
    clamped: bool = False

    def to_background(self, x: float, y: float) -> tuple:
        return (x * self.scale + self.offset[0], y * self.scale + self.offset[1])

    def to_chart(self, x: float, y: float) -> tuple:
        return ((x - self.offset[0]) / self.scale, (y - self.offset[1]) / self.scale)


def plan_placement(chart_size: tuple, background_size: tuple,
                   relative_scale: float = DEFAULT_RELATIVE_SCALE,
                   anchor: str = "center",
                   offset_px: Optional[tuple] = None) -> PlacementTransform:
    """Scale/offset for embedding a chart into a background.

    scale = relative_scale * bg_height / chart_height, reduced (and flagged)
    if the placed rect would overflow; ``offset_px`` nudges the anchored
    position and is clamped into bounds the same way.
    """
    cw, ch = chart_size
    bw, bh = background_size
    if cw <= 0 or ch <= 0 or bw <= 0 or bh <= 0:
        raise PlacementError(f"degenerate sizes: chart {chart_size}, background {background_size}")
    if relative_scale <= 0:
        raise PlacementError(f"relative_scale must be > 0, got {relative_scale}")
    if anchor not in ANCHORS:
        raise PlacementError(f"unknown anchor {anchor!r} (one of {ANCHORS})")

    clamped = False
    scale = relative_scale * bh / ch
    if cw * scale > bw or ch * scale > bh:
        scale = min(bw / cw, bh / ch)
        clamped = True
    pw, ph = scaled_size((cw, ch), scale)
    # rounding can push one px past the border at exact-fit scales
    pw, ph = min(pw, bw), min(ph, bh)

    if anchor == "center":
        ox, oy = (bw - pw) / 2.0, (bh - ph) / 2.0
    elif anchor == "top_left":
        ox, oy = 0.0, 0.0
    elif anchor == "top_right":
        ox, oy = float(bw - pw), 0.0
    elif anchor == "bottom_left":
        ox, oy = 0.0, float(bh - ph)
    else:
        ox, oy = float(bw - pw), float(bh - ph)
    if offset_px is not None:
        ox += offset_px[0]
        oy += offset_px[1]

    cx = min(max(ox, 0.0), float(bw - pw))
    cy = min(max(oy, 0.0), float(bh - ph))
    if (cx, cy) != (ox, oy):
        clamped = True
    ox, oy = int(round(cx)), int(round(cy))

    return PlacementTransform(
        scale=scale, offset=(ox, oy), chart_size=(cw, ch),
        placed_size=(pw, ph), clamped=clamped,
    )


def place_map(pixels: np.ndarray, transform: PlacementTransform,
              background_size: tuple, kind: Optional[ControlKind] = None,
              method: Optional[str] = None) -> np.ndarray:
    """Embed a chart-space map into a zeroed background-size canvas."""
    arr = np.asarray(pixels)
    if arr.ndim != 2:
        raise PlacementError(f"control maps are 2-D, got shape {arr.shape}")
    if (arr.shape[1], arr.shape[0]) != tuple(transform.chart_size):
        raise PlacementError(
            f"map size {arr.shape[1]}x{arr.shape[0]} does not match "
            f"planned chart size {transform.chart_size[0]}x{transform.chart_size[1]}"
        )
    if method is None:
        method = "nearest" if kind in _BINARY_KINDS else "bilinear"

    bw, bh = background_size
    pw, ph = transform.placed_size
    if method == "nearest" and (pw < arr.shape[1] or ph < arr.shape[0]):
        # plain nearest decimation skips source rows, erasing 1 px lines;
        # max-pool over the sampling footprint first so they survive
        win = (int(np.ceil(arr.shape[0] / ph)), int(np.ceil(arr.shape[1] / pw)))
        arr = ndimage.maximum_filter(arr, size=win, mode="constant")
    scaled = resample_to(arr, (pw, ph), method=method)
    canvas = np.zeros((bh, bw), dtype=np.uint8)
    ox, oy = transform.offset
    canvas[oy:oy + ph, ox:ox + pw] = scaled
    return canvas


def compose_maps(placed: np.ndarray, background_map: Optional[np.ndarray] = None,
                 mode: ComposeMode = ComposeMode.ADDITIVE,
                 chart_weight: float = 1.0, background_weight: float = 1.0,
                 combine: str = "sum") -> np.ndarray:
    """Mix the placed chart map with the background's edge map.

    additive: chart outline only (background_map ignored). blend: weighted
    sum (or per-pixel max) of both, clipped to [0, 255]. blend with weight 1
    against an all-zero background map reproduces additive exactly.
    """
    mode = ComposeMode(mode)
    placed = np.asarray(placed)
    if placed.ndim != 2:
        raise PlacementError(f"composed maps are 2-D, got shape {placed.shape}")
    if chart_weight < 0 or background_weight < 0:
        raise PlacementError("compose weights must be >= 0")
    if combine not in ("sum", "max"):
        raise PlacementError(f"combine must be 'sum' or 'max', got {combine!r}")

    chart_term = placed.astype(np.float64) * chart_weight
    if mode == ComposeMode.ADDITIVE:
        mixed = chart_term
    else:
        if background_map is None:
            raise PlacementError("blend mode needs the background's edge map")
        bg = np.asarray(background_map)
        if bg.shape != placed.shape:
            raise PlacementError(
                f"map shapes differ: chart {placed.shape} vs background {bg.shape}"
            )
        bg_term = bg.astype(np.float64) * background_weight
        mixed = chart_term + bg_term if combine == "sum" else np.maximum(chart_term, bg_term)
    return np.clip(np.round(mixed), 0, 255).astype(np.uint8)
