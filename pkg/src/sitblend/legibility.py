"""Post-generation legibility verification.

Two geometric checks run against the generated picture:

* edge alignment: what fraction of the composed outline's pixels have a
  detected edge in the output within a Chebyshev radius;
* bar-height recovery: for bar charts, each bar's placed column band is
  scanned top-down in the output's edge map for the first group of solid
  edge rows; the group's midpoint marks the bar top, and the implied
  height is compared with the layout's truth.

Colour is deliberately out of scope; the report says so in a fixed field
rather than leaving an ambiguous absence. Heights are recovered in
background pixels; a bar whose band shows no edge above the baseline is
reported as absent (None), never as height zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import ndimage

from .chartspec import LayoutResult, MarkKind
from .compose import PlacementTransform
from .control import ControlKind, canny

DEFAULT_TOLERANCE_PX = 2.0
DEFAULT_RADIUS = 2
DEFAULT_ALIGNMENT_THRESHOLD = 0.9

# The alignment detector runs hotter than the chart extractor. Extraction
# sees flat synthetic fills where 50/100 is comfortable; here we are hunting
# for thin imprinted lines whose gradient is diluted by the photo underneath,
# and false positives cost nothing because the score only counts recall.
DEFAULT_DETECT_LOW = 20.0
DEFAULT_DETECT_HIGH = 50.0

COLOUR_NOTE = "not assessed"

# rows this close to the baseline are treated as the bar's own bottom edge
_BASELINE_GUARD_PX = 2

# a row counts as the bar top when at least this fraction of the band is edge
_ROW_FILL = 0.5

# an imprinted line shows up as two flank ridges a few rows apart; hits
# within this span of the first are one edge, and their midpoint is it
# (the line thickens with the placement scale, so the span must too)
_FLANK_SPAN_PX = 6


def _flank_span(scale: float) -> int:
    return max(_FLANK_SPAN_PX, int(np.ceil(2.0 * scale)) + 4)


def edge_alignment_score(reference: np.ndarray, candidate: np.ndarray,
                         radius: int = DEFAULT_RADIUS) -> float:
    """Fraction of reference edge pixels matched by the candidate.

    A match is any candidate edge pixel within Chebyshev distance
    ``radius``. An empty reference aligns perfectly by definition.
    """
    ref = np.asarray(reference) > 0
    cand = np.asarray(candidate) > 0
    if ref.shape != cand.shape:
        raise ValueError(f"shape mismatch: reference {ref.shape} vs candidate {cand.shape}")
    total = int(ref.sum())
    if total == 0:
        return 1.0
    if radius > 0:
        cand = ndimage.maximum_filter(cand, size=2 * radius + 1, mode="constant")
    return float((ref & cand).sum()) / total


@dataclass(frozen=True)
class BarCheck:
    series: int
    index: int
    expected_px: float            # background px
    recovered_px: Optional[float]
    error_px: Optional[float]
    ok: bool


@dataclass(frozen=True)
class LegibilityReport:
    edge_alignment: float
    alignment_threshold: float
    alignment_ok: bool
    tolerance_px: float
    bars: tuple = ()
    bars_ok: bool = True
    colour: str = COLOUR_NOTE
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "edge_alignment": self.edge_alignment,
            "alignment_threshold": self.alignment_threshold,
            "alignment_ok": self.alignment_ok,
            "tolerance_px": self.tolerance_px,
            "bars": [
                {
                    "series": b.series,
                    "index": b.index,
                    "expected_px": b.expected_px,
                    "recovered_px": b.recovered_px,
                    "error_px": b.error_px,
                    "ok": b.ok,
                }
                for b in self.bars
            ],
            "bars_ok": self.bars_ok,
            "colour": self.colour,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _bar_rects(layout: LayoutResult):
    out = []
    counters: dict = {}
    for mark in layout.marks:
        if mark.kind == MarkKind.RECT:
            series = mark.series
            idx = counters.get(series, 0)
            counters[series] = idx + 1
            out.append((series, idx, mark))
    return out


def recover_bar_heights(output_image: np.ndarray, layout: LayoutResult,
                        transform: PlacementTransform,
                        edges: Optional[np.ndarray] = None,
                        canny_params: Optional[dict] = None,
                        band_inset: float = 0.25):
    """Measured bar heights in background px, one entry per rect mark.

    ``edges`` may carry a precomputed full-frame edge map; otherwise the
    detector runs on a crop around the placed chart only, which is what
    keeps per-chart verification fast.
    """
    rects = _bar_rects(layout)
    if not rects:
        return []

    image = np.asarray(output_image)
    bg_h, bg_w = image.shape[:2]
    if edges is not None:
        edge_map = np.asarray(edges) > 0
        crop_x0 = crop_y0 = 0
    else:
        ox, oy = transform.offset
        pw, ph = transform.placed_size
        pad = 8
        crop_x0 = max(0, int(ox) - pad)
        crop_y0 = max(0, int(oy) - pad)
        crop_x1 = min(bg_w, int(ox) + pw + pad)
        crop_y1 = min(bg_h, int(oy) + ph + pad)
        params = canny_params
        if params is None:
            params = {"low": DEFAULT_DETECT_LOW, "high": DEFAULT_DETECT_HIGH}
        edge_map = canny(image[crop_y0:crop_y1, crop_x0:crop_x1], **params) > 0

    plot_x, plot_y, plot_w, plot_h = layout.plot_area
    _bx, bottom_bg = transform.to_background(plot_x, plot_y + plot_h)
    _tx, top_bg = transform.to_background(plot_x, plot_y)

    heights = []
    for _series, _idx, mark in rects:
        (x0, _y0), (x1, _y1) = mark.vertices
        bx0, _ = transform.to_background(x0, 0)
        bx1, _ = transform.to_background(x1, 0)
        width = bx1 - bx0
        c0 = int(np.ceil(bx0 + band_inset * width)) - crop_x0
        c1 = int(np.floor(bx1 - band_inset * width)) - crop_x0
        c0 = max(0, c0)
        c1 = min(edge_map.shape[1], max(c1, c0 + 1))
        r0 = max(0, int(np.floor(top_bg)) - 2 - crop_y0)
        r1 = min(edge_map.shape[0], int(np.ceil(bottom_bg)) - _BASELINE_GUARD_PX - crop_y0)
        if c0 >= edge_map.shape[1] or r0 >= r1:
            heights.append(None)
            continue
        band = edge_map[r0:r1, c0:c1]
        need = max(1, int(np.ceil(_ROW_FILL * band.shape[1])))
        counts = band.sum(axis=1)
        hit_rows = np.nonzero(counts >= need)[0]
        if hit_rows.size == 0:
            heights.append(None)
        else:
            # a painted boundary gives one ridge, an imprinted line gives a
            # flank pair straddling it; either way the group's midpoint is
            # the unbiased boundary estimate
            first = hit_rows[0]
            group = hit_rows[hit_rows <= first + _flank_span(transform.scale)]
            top_y = (first + group[-1]) / 2.0 + r0 + crop_y0
            # nearest upscaling centres a source row's band at s*r - 0.5
            # while the geometric edge sits at s*y0, half a scaled pixel
            # higher on average; compensate so tall placements stay honest
            bias = max(0.0, (transform.scale - 1.0) / 2.0)
            heights.append(bottom_bg - top_y + bias)
    return heights


def verify_legibility(output_image: np.ndarray, composed_map: np.ndarray,
                      layout: Optional[LayoutResult] = None,
                      transform: Optional[PlacementTransform] = None,
                      tolerance_px: float = DEFAULT_TOLERANCE_PX,
                      radius: int = DEFAULT_RADIUS,
                      alignment_threshold: float = DEFAULT_ALIGNMENT_THRESHOLD,
                      canny_params: Optional[dict] = None,
                      map_kind: Optional[ControlKind] = None) -> LegibilityReport:
    """Full geometric report for one generated output.

    One sensitive detector pass serves both checks; bar recovery reuses
    the full-frame edge map instead of re-detecting on a crop.
    """
    params = canny_params
    if params is None:
        params = {"low": DEFAULT_DETECT_LOW, "high": DEFAULT_DETECT_HIGH}
    candidate = canny(np.asarray(output_image), **params)
    reference = np.asarray(composed_map)
    if map_kind in (ControlKind.SOFTEDGE, ControlKind.HED):
        # graded ridges: a soft skirt pixel is anti-aliasing, not geometry;
        # compare detector output against the map's own detected structure
        reference = canny(reference, **params)
    alignment = edge_alignment_score(reference, candidate, radius=radius)
    alignment_ok = alignment >= alignment_threshold

    checks = []
    bars_ok = True
    if layout is not None and transform is not None:
        rects = _bar_rects(layout)
        if rects:
            recovered = recover_bar_heights(
                output_image, layout, transform, edges=candidate
            )
            for (series, idx, mark), rec in zip(rects, recovered):
                (_x0, y0), (_x1, y1) = mark.vertices
                expected = (y1 - y0) * transform.scale
                if rec is None:
                    # absent is correct only for bars too short to detect
                    ok = bool(expected <= max(tolerance_px, _BASELINE_GUARD_PX))
                    err = None
                else:
                    err = float(abs(rec - expected))
                    ok = bool(err <= tolerance_px)
                bars_ok = bars_ok and ok
                checks.append(BarCheck(
                    series=series, index=idx, expected_px=float(expected),
                    recovered_px=None if rec is None else float(rec),
                    error_px=None if err is None else float(err), ok=ok,
                ))

    return LegibilityReport(
        edge_alignment=float(alignment),
        alignment_threshold=alignment_threshold,
        alignment_ok=alignment_ok,
        tolerance_px=tolerance_px,
        bars=tuple(checks),
        bars_ok=bool(bars_ok),
        passed=bool(alignment_ok and bars_ok),
    )
