"""Edge alignment scoring and bar-height recovery."""

from __future__ import annotations

import json

import numpy as np
import pytest
from conftest import make_spec

from sitblend.chartspec import layout_chart
from sitblend.compose import PlacementTransform, place_map, plan_placement
from sitblend.control import ControlKind, extract_control
from sitblend.legibility import (
    COLOUR_NOTE,
    edge_alignment_score,
    recover_bar_heights,
    verify_legibility,
)
from sitblend.raster import render_chart


# ---------------------------------------------------------------------------
# alignment score


def test_empty_reference_aligns_perfectly():
    z = np.zeros((10, 10), dtype=np.uint8)
    cand = np.full((10, 10), 255, dtype=np.uint8)
    assert edge_alignment_score(z, cand) == 1.0


def test_identical_maps_score_one():
    rng = np.random.default_rng(0)
    m = np.where(rng.random((30, 30)) < 0.1, 255, 0).astype(np.uint8)
    assert edge_alignment_score(m, m) == 1.0


def test_disjoint_maps_score_zero():
    ref = np.zeros((20, 20), dtype=np.uint8)
    ref[2, 2] = 255
    cand = np.zeros((20, 20), dtype=np.uint8)
    cand[15, 15] = 255
    assert edge_alignment_score(ref, cand) == 0.0


def test_radius_tolerates_small_shifts():
    ref = np.zeros((20, 20), dtype=np.uint8)
    ref[10, 5:15] = 255
    shifted = np.zeros_like(ref)
    shifted[12, 5:15] = 255
    assert edge_alignment_score(ref, shifted, radius=0) == 0.0
    assert edge_alignment_score(ref, shifted, radius=2) == 1.0
    assert edge_alignment_score(ref, shifted, radius=1) == 0.0


def test_score_is_recall_not_precision():
    # extra candidate edges never hurt the score
    ref = np.zeros((20, 20), dtype=np.uint8)
    ref[10, 5:15] = 255
    noisy = np.full((20, 20), 255, dtype=np.uint8)
    assert edge_alignment_score(ref, noisy) == 1.0


def test_partial_overlap_is_fractional():
    ref = np.zeros((10, 10), dtype=np.uint8)
    ref[0, :4] = 255  # 4 reference pixels
    cand = np.zeros_like(ref)
    cand[0, :1] = 255
    assert edge_alignment_score(ref, cand, radius=0) == pytest.approx(0.25)


def test_shape_mismatch_raises():
    with pytest.raises(ValueError, match="shape mismatch"):
        edge_alignment_score(np.zeros((4, 4)), np.zeros((5, 4)))


# ---------------------------------------------------------------------------
# bar recovery on a synthetic composite


def _identity_compose(width=200, height=160, values=(3.0, 7.0, 5.0)):
    spec = make_spec(width=width, height=height,
                     data={"series": [{"label": "s", "values": list(values)}]})
    rendered = render_chart(spec)
    layout = rendered.layout
    outline = extract_control(rendered.pixels, ControlKind.CANNY).pixels
    tr = PlacementTransform(scale=1.0, offset=(0, 0),
                            chart_size=(width, height),
                            placed_size=(width, height))
    composed = place_map(outline, tr, (width, height), kind=ControlKind.CANNY)
    # stamp the outline into a mid-grey scene
    scene = np.full((height, width, 3), 150, dtype=np.uint8)
    scene[composed > 0] = 20
    return scene, composed, layout, tr


def test_identity_round_trip_within_tolerance():
    scene, _, layout, tr = _identity_compose()
    heights = recover_bar_heights(scene, layout, tr)
    plot_h = layout.plot_area[3]
    expected = [plot_h * v / 7.0 for v in (3.0, 7.0, 5.0)]
    assert len(heights) == 3
    for got, want in zip(heights, expected):
        assert got is not None
        assert abs(got - want) <= 2.0


def test_recovery_accepts_precomputed_edges():
    scene, composed, layout, tr = _identity_compose()
    via_edges = recover_bar_heights(scene, layout, tr, edges=composed)
    assert all(h is not None for h in via_edges)


def test_no_rect_marks_returns_empty():
    spec = make_spec(idiom="line")
    layout = layout_chart(spec)
    tr = PlacementTransform(scale=1.0, offset=(0, 0), chart_size=(160, 160),
                            placed_size=(160, 160))
    img = np.zeros((160, 160, 3), dtype=np.uint8)
    assert recover_bar_heights(img, layout, tr) == []


def test_featureless_image_recovers_nothing():
    spec = make_spec()
    layout = layout_chart(spec)
    tr = PlacementTransform(scale=1.0, offset=(0, 0), chart_size=(160, 160),
                            placed_size=(160, 160))
    flat = np.full((160, 160, 3), 150, dtype=np.uint8)
    heights = recover_bar_heights(flat, layout, tr)
    assert heights == [None, None, None]


# ---------------------------------------------------------------------------
# full report


def test_verify_passes_on_faithful_composite():
    scene, composed, layout, tr = _identity_compose()
    report = verify_legibility(scene, composed, layout=layout, transform=tr)
    assert report.passed
    assert report.alignment_ok
    assert report.edge_alignment >= 0.9
    assert report.bars_ok
    assert len(report.bars) == 3
    for check in report.bars:
        assert check.ok
        assert check.error_px is not None and check.error_px <= 2.0


def test_verify_fails_on_unrelated_image():
    _, composed, layout, tr = _identity_compose()
    noise = np.full(composed.shape + (3,), 150, dtype=np.uint8)
    report = verify_legibility(noise, composed, layout=layout, transform=tr)
    assert not report.passed
    assert not report.alignment_ok
    assert report.edge_alignment < 0.5


def test_verify_without_layout_checks_alignment_only():
    scene, composed, *_ = _identity_compose()
    report = verify_legibility(scene, composed)
    assert report.bars == ()
    assert report.bars_ok
    assert report.passed == report.alignment_ok


def test_report_serializes_cleanly():
    scene, composed, layout, tr = _identity_compose()
    report = verify_legibility(scene, composed, layout=layout, transform=tr)
    doc = json.loads(report.to_json())
    assert set(doc) == {
        "edge_alignment", "alignment_threshold", "alignment_ok",
        "tolerance_px", "bars", "bars_ok", "colour", "passed",
    }
    assert doc["colour"] == COLOUR_NOTE
    assert isinstance(doc["passed"], bool)
    assert isinstance(doc["bars"][0]["ok"], bool)
    assert isinstance(doc["edge_alignment"], float)


def test_scaled_placement_round_trip():
    # chart placed at half size into a larger scene
    spec = make_spec(width=200, height=160)
    rendered = render_chart(spec)
    layout = rendered.layout
    outline = extract_control(rendered.pixels, ControlKind.CANNY).pixels
    tr = plan_placement((200, 160), (320, 240), 0.5)
    composed = place_map(outline, tr, (320, 240), kind=ControlKind.CANNY)
    scene = np.full((240, 320, 3), 150, dtype=np.uint8)
    scene[composed > 0] = 20
    report = verify_legibility(scene, composed, layout=layout, transform=tr)
    assert report.passed, report.to_json()
