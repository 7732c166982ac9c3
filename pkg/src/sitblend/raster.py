"""Chart rasterizer: mark geometry to RGB pixel arrays.

Everything is drawn with numpy primitives (scanline-free vectorized fills,
distance-field strokes). Marks are painted back to front: larger depth_layer
first, layer 0 last, so the frontmost layer wins overlaps. Anti-aliasing is
off by default; pass supersample > 1 for box-filtered supersampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .chartspec import (
    ChartSpec,
    LayoutResult,
    MarkGeometry,
    MarkKind,
    StyleSpec,
    layout_chart,
)
from .errors import RasterError

# Dark saturated fills on a white ground give strong luma edges.
PALETTE = (
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (127, 127, 127),
)

BACKGROUND = (255, 255, 255)


@dataclass(frozen=True)
class RenderedChart:
    pixels: np.ndarray  # (H, W, 3) uint8
    layout: LayoutResult


def render_chart(spec: ChartSpec, supersample: int = 1) -> RenderedChart:
    layout = layout_chart(spec)
    pixels = render_layout(layout, spec.style, spec.canvas, supersample=supersample)
    return RenderedChart(pixels=pixels, layout=layout)


def render_layout(layout: LayoutResult, style: StyleSpec, size: tuple,
                  supersample: int = 1) -> np.ndarray:
    """Rasterize a layout onto a white canvas of ``size`` = (width, height)."""
    if supersample < 1 or supersample != int(supersample):
        raise RasterError(f"supersample must be a positive integer, got {supersample}")
    k = int(supersample)
    w, h = size
    img = np.empty((h * k, w * k, 3), dtype=np.uint8)
    img[:] = BACKGROUND

    for mark in sorted(layout.marks, key=lambda m: -m.depth_layer):
        color = PALETTE[mark.series % len(PALETTE)]
        _draw_mark(img, mark, style, k, color)

    for text, x, y in layout.labels:
        draw_text(img, text, x * k, y * k, (0, 0, 0), scale=k)

    if k > 1:
        img = img.reshape(h, k, w, k, 3).mean(axis=(1, 3))
        img = np.round(img).astype(np.uint8)
    return img


def render_depth(layout: LayoutResult, size: tuple) -> np.ndarray:
    """Grayscale silhouette image for depth conditioning.

    Background 0. Layer intensity = 255 - layer*step with
    step = floor(255 / (max_layer + 1)), so layer 0 (frontmost) is always
    255 and deeper layers step down without reaching 0. Drawn back to front.
    """
    w, h = size
    img = np.zeros((h, w, 3), dtype=np.uint8)
    if not layout.marks:
        return img[:, :, 0].copy()
    max_layer = max(m.depth_layer for m in layout.marks)
    step = 255 // (max_layer + 1)
    style = StyleSpec()
    for mark in sorted(layout.marks, key=lambda m: -m.depth_layer):
        value = 255 - mark.depth_layer * step
        _draw_mark(img, mark, style, 1, (value, value, value))
    return img[:, :, 0].copy()


def _draw_mark(img, mark: MarkGeometry, style: StyleSpec, k: int, color) -> None:
    pts = [(x * k, y * k) for x, y in mark.vertices]
    if mark.kind == MarkKind.RECT:
        (x0, y0), (x1, y1) = pts
        fill_rect(img, x0, y0, x1, y1, color)
    elif mark.kind == MarkKind.REGION:
        fill_polygon(img, pts, color)
    elif mark.kind == MarkKind.POLYLINE:
        draw_polyline(img, pts, style.stroke_width * k, color)
    elif mark.kind == MarkKind.POINT:
        (cx, cy) = pts[0]
        draw_disc(img, cx, cy, mark.params.get("size", style.mark_size) * k / 2.0, color)
    elif mark.kind == MarkKind.WEDGE:
        (cx, cy) = pts[0]
        fill_wedge(
            img, cx, cy,
            mark.params["radius"] * k,
            mark.params["start_deg"],
            mark.params["end_deg"],
            color,
        )
    elif mark.kind == MarkKind.ARROW:
        draw_arrow(img, pts[0], pts[1], style.stroke_width * k,
                   mark.params.get("head", 4.0) * k, color)
    else:  # pragma: no cover - closed enum
        raise RasterError(f"unknown mark kind {mark.kind!r}")


# ---------------------------------------------------------------------------
# primitives; all take float px coordinates, sample at pixel centers


def fill_rect(img, x0: float, y0: float, x1: float, y1: float, color) -> None:
    """Fill pixels whose centers fall inside [x0,x1) x [y0,y1)."""
    h, w = img.shape[:2]
    if x1 < x0:
        x0, x1 = x1, x0
    if y1 < y0:
        y0, y1 = y1, y0
    # pixel i covers [i, i+1); center i+0.5 in [a, b) iff ceil(a-0.5) <= i < b-0.5
    ix0 = max(0, int(np.ceil(x0 - 0.5)))
    iy0 = max(0, int(np.ceil(y0 - 0.5)))
    ix1 = min(w, int(np.ceil(x1 - 0.5)))
    iy1 = min(h, int(np.ceil(y1 - 0.5)))
    if ix0 < ix1 and iy0 < iy1:
        img[iy0:iy1, ix0:ix1] = color


def _bbox(img, xs, ys, pad: float):
    h, w = img.shape[:2]
    x0 = max(0, int(np.floor(min(xs) - pad)))
    x1 = min(w, int(np.ceil(max(xs) + pad)) + 1)
    y0 = max(0, int(np.floor(min(ys) - pad)))
    y1 = min(h, int(np.ceil(max(ys) + pad)) + 1)
    if x0 >= x1 or y0 >= y1:
        return None
    return x0, x1, y0, y1


def fill_polygon(img, pts: Sequence, color) -> None:
    """Even-odd fill; pixel centers tested against half-open edge spans."""
    if len(pts) < 3:
        return
    box = _bbox(img, [p[0] for p in pts], [p[1] for p in pts], 1.0)
    if box is None:
        return
    x0, x1, y0, y1 = box
    yc = np.arange(y0, y1, dtype=np.float64) + 0.5
    xc = np.arange(x0, x1, dtype=np.float64) + 0.5
    crossings = np.zeros((y1 - y0, x1 - x0), dtype=np.int32)
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        hit = (ay <= yc) != (by <= yc)
        if not hit.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (yc - ay) / (by - ay)
        xi = ax + t * (bx - ax)
        crossings += (hit[:, None] & (xc[None, :] < xi[:, None])).astype(np.int32)
    img[y0:y1, x0:x1][crossings % 2 == 1] = color


def draw_segment(img, a, b, width: float, color) -> None:
    """Stroke one segment with round caps (distance-to-segment test)."""
    r = max(width, 1.0) / 2.0
    box = _bbox(img, [a[0], b[0]], [a[1], b[1]], r + 1.0)
    if box is None:
        return
    x0, x1, y0, y1 = box
    yy, xx = np.mgrid[y0:y1, x0:x1]
    px = xx + 0.5 - a[0]
    py = yy + 0.5 - a[1]
    dx, dy = b[0] - a[0], b[1] - a[1]
    seg2 = dx * dx + dy * dy
    if seg2 == 0:
        d2 = px * px + py * py
    else:
        t = np.clip((px * dx + py * dy) / seg2, 0.0, 1.0)
        ex = px - t * dx
        ey = py - t * dy
        d2 = ex * ex + ey * ey
    img[y0:y1, x0:x1][d2 <= r * r] = color


def draw_polyline(img, pts: Sequence, width: float, color) -> None:
    if len(pts) == 1:
        draw_disc(img, pts[0][0], pts[0][1], max(width, 1.0) / 2.0, color)
        return
    for a, b in zip(pts[:-1], pts[1:]):
        draw_segment(img, a, b, width, color)


def draw_disc(img, cx: float, cy: float, radius: float, color) -> None:
    r = max(radius, 0.5)
    box = _bbox(img, [cx], [cy], r + 1.0)
    if box is None:
        return
    x0, x1, y0, y1 = box
    yy, xx = np.mgrid[y0:y1, x0:x1]
    d2 = (xx + 0.5 - cx) ** 2 + (yy + 0.5 - cy) ** 2
    img[y0:y1, x0:x1][d2 <= r * r] = color


def fill_wedge(img, cx: float, cy: float, radius: float,
               start_deg: float, end_deg: float, color) -> None:
    """Filled circular sector; angles clockwise from 12 o'clock."""
    span = end_deg - start_deg
    if span <= 0 or radius <= 0:
        return
    box = _bbox(img, [cx], [cy], radius + 1.0)
    if box is None:
        return
    x0, x1, y0, y1 = box
    yy, xx = np.mgrid[y0:y1, x0:x1]
    dx = xx + 0.5 - cx
    dy = yy + 0.5 - cy
    inside = dx * dx + dy * dy <= radius * radius
    if span < 360.0:
        # screen angle clockwise from up: atan2(dx, -dy)
        theta = np.degrees(np.arctan2(dx, -dy)) % 360.0
        rel = (theta - start_deg) % 360.0
        inside &= rel < span
    img[y0:y1, x0:x1][inside] = color


def draw_arrow(img, tail, tip, width: float, head: float, color) -> None:
    draw_segment(img, tail, tip, width, color)
    dx, dy = tip[0] - tail[0], tip[1] - tail[1]
    norm = float(np.hypot(dx, dy))
    if norm == 0:
        return
    ux, uy = dx / norm, dy / norm
    # barbs swept back 30 degrees either side of the shaft
    cos_a, sin_a = np.cos(np.radians(150.0)), np.sin(np.radians(150.0))
    for s in (1.0, -1.0):
        bx = ux * cos_a - s * uy * sin_a
        by = s * ux * sin_a + uy * cos_a
        end = (tip[0] + bx * head, tip[1] + by * head)
        draw_segment(img, tip, end, width, color)


# ---------------------------------------------------------------------------
# minimal 5x7 bitmap font (labels are decorative, never verified)

_FONT = {
    "0": (0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E),
    "1": (0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "2": (0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F),
    "3": (0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E),
    "4": (0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02),
    "5": (0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E),
    "6": (0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E),
    "7": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08),
    "8": (0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E),
    "9": (0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C),
    "A": (0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11),
    "B": (0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E),
    "C": (0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E),
    "D": (0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C),
    "E": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F),
    "F": (0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10),
    "G": (0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F),
    "H": (0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11),
    "I": (0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E),
    "J": (0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C),
    "K": (0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11),
    "L": (0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F),
    "M": (0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11),
    "N": (0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11),
    "O": (0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "P": (0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10),
    "Q": (0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D),
    "R": (0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11),
    "S": (0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E),
    "T": (0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04),
    "U": (0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E),
    "V": (0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04),
    "W": (0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A),
    "X": (0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11),
    "Y": (0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04),
    "Z": (0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F),
    " ": (0, 0, 0, 0, 0, 0, 0),
    "-": (0, 0, 0, 0x0E, 0, 0, 0),
    ".": (0, 0, 0, 0, 0, 0x0C, 0x0C),
}


def draw_text(img, text: str, x: float, y: float, color, scale: int = 1) -> None:
    """Top-left anchored 5x7 glyphs, 1 px tracking, unknown chars skipped."""
    h, w = img.shape[:2]
    cx = int(round(x))
    cy = int(round(y))
    for ch in str(text).upper():
        glyph = _FONT.get(ch)
        if glyph is not None:
            for row, bits in enumerate(glyph):
                for col in range(5):
                    if bits & (1 << (4 - col)):
                        px = cx + col * scale
                        py = cy + row * scale
                        if 0 <= py < h - scale + 1 and 0 <= px < w - scale + 1:
                            img[py:py + scale, px:px + scale] = color
        cx += 6 * scale
