"""Built-in demo pairings: chart specs plus synthetic photo backgrounds.

Nine chart/environment pairings cover every idiom. The backgrounds are
procedurally generated (seeded per name, fully deterministic) with
moderate texture: enough structure to look like a surface, smooth enough
that an imprinted outline stays detectable.

``python -m sitblend.fixtures OUTDIR`` writes all of them to disk.
"""

from __future__ import annotations

import json
import zlib
from pathlib import Path

import numpy as np

from .png import write_png
from .raster import draw_segment, fill_polygon

SIZE = (512, 384)  # (width, height), multiple of 8


def _rng(name: str) -> np.random.Generator:
    return np.random.default_rng(zlib.crc32(name.encode("utf-8")))


def _base(color, size=SIZE) -> np.ndarray:
    w, h = size
    img = np.empty((h, w, 3), dtype=np.float64)
    img[:] = color
    return img


def _finish(img: np.ndarray, rng, noise_amp: float = 8.0) -> np.ndarray:
    img = img + rng.normal(0.0, noise_amp, size=img.shape)
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


# -- background generators --------------------------------------------------


def _bg_brick_wall(rng) -> np.ndarray:
    img = _base((152, 78, 64))
    h, w = img.shape[:2]
    brick_h, brick_w, mortar = 24, 48, 3
    for row, y in enumerate(range(0, h, brick_h)):
        img[y:y + mortar, :] = (196, 188, 176)
        shift = (brick_w // 2) * (row % 2)
        for x in range(-shift, w, brick_w):
            x0 = max(0, x)
            img[y:y + brick_h, x0:x0 + mortar] = (196, 188, 176)
            # slight per-brick tone variation
            x1 = min(w, x + brick_w)
            if x1 > x0:
                img[y + mortar:y + brick_h, x0 + mortar:x1] += rng.normal(0, 6)
    return _finish(img, rng, 7.0)


def _bg_facade(rng) -> np.ndarray:
    img = _base((181, 177, 169))
    h, w = img.shape[:2]
    for y in range(28, h - 40, 78):
        for x in range(24, w - 40, 70):
            img[y:y + 48, x:x + 38] = (62, 68, 80)
            img[y:y + 48, x + 18:x + 21] = (110, 115, 125)  # mullion
    return _finish(img, rng, 6.0)


def _bg_colonnade(rng) -> np.ndarray:
    img = _base((201, 194, 182))
    h, w = img.shape[:2]
    xs = np.arange(w, dtype=np.float64)
    for x in range(20, w, 88):
        col = np.clip(1.0 - np.abs(xs - (x + 18)) / 20.0, 0.0, 1.0)
        shade = 40.0 * np.sin(np.pi * np.clip((xs - x) / 36.0, 0.0, 1.0))
        img += (col * 18.0 - shade * (np.abs(xs - x - 18) < 18))[None, :, None]
    img[: h // 8, :] = (172, 166, 154)  # entablature
    img[-h // 10:, :] = (158, 152, 142)  # stylobate
    return _finish(img, rng, 6.0)


def _bg_grass(rng) -> np.ndarray:
    img = _base((72, 108, 54))
    h, w = img.shape[:2]
    yy = np.linspace(-12.0, 12.0, h)
    img += yy[:, None, None]  # darker at the top, lighter near the ground
    for _ in range(900):
        x = int(rng.integers(0, w))
        y = int(rng.integers(0, h - 8))
        length = int(rng.integers(4, 9))
        tone = rng.normal(0.0, 16.0)
        img[y:y + length, x] += tone
    return _finish(img, rng, 7.0)


def _bg_field(rng) -> np.ndarray:
    img = _base((0, 0, 0))
    h, w = img.shape[:2]
    horizon = int(h * 0.42)
    sky_t = np.linspace(0.0, 1.0, horizon)[:, None, None]
    img[:horizon] = (1 - sky_t) * np.array((176, 204, 228)) + sky_t * np.array((205, 222, 236))
    ground_t = np.linspace(0.0, 1.0, h - horizon)[:, None, None]
    img[horizon:] = (1 - ground_t) * np.array((128, 140, 82)) + ground_t * np.array((108, 124, 66))
    img[horizon:horizon + 2] = (90, 100, 60)
    for y in range(horizon + 14, h, 22):  # furrows converge loosely
        img[y:y + 2, :] = (96, 110, 58)
    return _finish(img, rng, 6.0)


def _bg_forest(rng) -> np.ndarray:
    img = _base((47, 72, 42))
    h, w = img.shape[:2]
    canopy = int(h * 0.45)
    img[:canopy] += rng.normal(0.0, 14.0, size=(canopy, w, 3))
    for _ in range(14):
        x = int(rng.integers(10, w - 14))
        width = int(rng.integers(7, 13))
        tone = np.array((58, 44, 32)) + rng.normal(0, 5)
        img[canopy - 30:, x:x + width] = tone
        img[canopy - 30:, x:x + 2] = tone * 0.8  # shaded trunk side
    return _finish(img, rng, 7.0)


def _bg_plaza(rng) -> np.ndarray:
    img = _base((189, 184, 173))
    h, w = img.shape[:2]
    out = np.clip(img, 0, 255).astype(np.uint8)
    seam = (128, 122, 112)
    # angular panel seams: jittered diagonal lattice
    for x in range(-h, w, 72):
        jx = x + int(rng.integers(-10, 10))
        draw_segment(out, (jx, 0), (jx + h // 2, h), 2.0, seam)
        draw_segment(out, (jx + 36, h), (jx + 36 + h // 2, 0), 2.0, seam)
    return _finish(out.astype(np.float64), rng, 5.0)


def _bg_sea_cliffs(rng) -> np.ndarray:
    img = _base((0, 0, 0))
    h, w = img.shape[:2]
    horizon = int(h * 0.5)
    sky_t = np.linspace(0.0, 1.0, horizon)[:, None, None]
    img[:horizon] = (1 - sky_t) * np.array((188, 210, 230)) + sky_t * np.array((214, 228, 238))
    sea_t = np.linspace(0.0, 1.0, h - horizon)[:, None, None]
    img[horizon:] = (1 - sea_t) * np.array((92, 140, 160)) + sea_t * np.array((66, 112, 136))
    out = np.clip(img, 0, 255).astype(np.uint8)
    rock = (142, 122, 96)
    for cx, top_w, base_w, top_y in ((int(w * 0.3), 30, 52, int(h * 0.22)),
                                     (int(w * 0.62), 24, 40, int(h * 0.3)),
                                     (int(w * 0.8), 18, 30, int(h * 0.36))):
        top_y += int(rng.integers(-8, 8))
        poly = [
            (cx - top_w // 2, top_y), (cx + top_w // 2, top_y),
            (cx + base_w // 2, h), (cx - base_w // 2, h),
        ]
        fill_polygon(out, [(float(px), float(py)) for px, py in poly], rock)
    return _finish(out.astype(np.float64), rng, 6.0)


def _bg_shell_roof(rng) -> np.ndarray:
    img = _base((0, 0, 0))
    h, w = img.shape[:2]
    sky_t = np.linspace(0.0, 1.0, h)[:, None, None]
    img[:] = (1 - sky_t) * np.array((158, 192, 222)) + sky_t * np.array((196, 214, 230))
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    shell = np.array((226, 223, 216))
    edge = np.array((124, 128, 138))
    for cx, cy, r in ((w * 0.35, h * 1.05, h * 0.75), (w * 0.55, h * 1.1, h * 0.85),
                      (w * 0.75, h * 1.15, h * 0.9)):
        cy += float(rng.normal(0, 4))
        dist = np.hypot(xx - cx, yy - cy)
        inside = dist < r
        img[inside] = shell
        rim = np.abs(dist - r) < 2.5
        img[rim] = edge
    return _finish(img, rng, 5.0)


# -- chart documents --------------------------------------------------------

_CANVAS = {"width": 256, "height": 192}


def _series(*entries):
    return {"series": [{"label": l, "values": list(v)} for l, v in entries]}


_CHARTS = {
    "scatter_brick_wall": {
        "idiom": "scatter",
        "canvas": dict(_CANVAS),
        "data": {"points": [[1, 2], [2, 5], [3, 3], [4, 7], [5, 4], [6, 8],
                            [7, 6], [8, 9], [9, 5], [10, 7], [11, 10], [12, 8]]},
        "style": {"mark_size": 7},
    },
    "line_facade": {
        "idiom": "line",
        "canvas": dict(_CANVAS),
        "data": _series(("north", (2, 4, 3, 6, 5, 8, 7, 9)),
                        ("south", (1, 2, 4, 3, 6, 5, 8, 6))),
        "style": {"stroke_width": 3},
    },
    "bar_colonnade": {
        "idiom": "bar",
        "canvas": dict(_CANVAS),
        "data": _series(("output", (3, 7, 5, 8, 4))),
    },
    "vector_field_grass": {
        "idiom": "vector_field",
        "canvas": dict(_CANVAS),
        "data": {"field": [
            [[1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0]],
            [[1, 1], [2, 1], [0, 2], [-1, 2], [-2, 1]],
            [[2, 0], [2, 2], [0, 3], [-2, 2], [-2, 0]],
            [[1, -1], [2, -1], [0, 1], [-2, -1], [-1, -1]],
        ]},
        "style": {"stroke_width": 2},
    },
    "tree_field": {
        "idiom": "tree",
        "canvas": dict(_CANVAS),
        "data": {"tree": [
            {"id": "root", "parent": None},
            {"id": "a", "parent": "root"}, {"id": "b", "parent": "root"},
            {"id": "c", "parent": "root"},
            {"id": "a1", "parent": "a"}, {"id": "a2", "parent": "a"},
            {"id": "b1", "parent": "b"},
            {"id": "c1", "parent": "c"}, {"id": "c2", "parent": "c"},
            {"id": "c3", "parent": "c"},
        ]},
        "style": {"mark_size": 8, "stroke_width": 2},
    },
    "streamgraph_forest": {
        "idiom": "streamgraph",
        "canvas": dict(_CANVAS),
        "data": _series(("oak", (2, 3, 4, 5, 4, 5, 6, 5, 4)),
                        ("pine", (1, 2, 2, 3, 4, 3, 2, 3, 2)),
                        ("birch", (1, 1, 2, 2, 3, 4, 3, 2, 2))),
    },
    "bar_plaza": {
        "idiom": "bar",
        "canvas": dict(_CANVAS),
        "data": _series(("visitors", (4, 6, 3, 8, 5, 9, 7))),
        "options": {"gap_fraction": 0.3},
    },
    "area_sea_cliffs": {
        "idiom": "area",
        "canvas": dict(_CANVAS),
        "data": _series(("swell", (3, 5, 4, 7, 6, 8, 5)),
                        ("tide", (1, 2, 3, 2, 4, 3, 2))),
    },
    "pie_shell_roof": {
        "idiom": "pie",
        "canvas": dict(_CANVAS),
        "data": _series(("share", (5, 3, 4, 2, 6))),
    },
}

_BACKGROUNDS = {
    "scatter_brick_wall": _bg_brick_wall,
    "line_facade": _bg_facade,
    "bar_colonnade": _bg_colonnade,
    "vector_field_grass": _bg_grass,
    "tree_field": _bg_field,
    "streamgraph_forest": _bg_forest,
    "bar_plaza": _bg_plaza,
    "area_sea_cliffs": _bg_sea_cliffs,
    "pie_shell_roof": _bg_shell_roof,
}

_PROMPTS = {
    "scatter_brick_wall": "a detailed photograph of an old brick wall with round studs",
    "line_facade": "a detailed photograph of a building facade with zigzag neon tubes",
    "bar_colonnade": "a detailed picture of a modern building with coloured bars on it",
    "vector_field_grass": "a detailed photograph of wind-swept grass with bent stalks",
    "tree_field": "a detailed photograph of a field with a branching kite string display",
    "streamgraph_forest": "a detailed photograph of a forest with flowing coloured mist bands",
    "bar_plaza": "a detailed picture of an angular plaza facade with coloured bars on it",
    "area_sea_cliffs": "a detailed photograph of sea cliffs with layered rock strata",
    "pie_shell_roof": "a detailed photograph of white shell roofs with coloured sail segments",
}


def pairing_names() -> tuple:
    return tuple(_CHARTS)


def chart_document(name: str) -> dict:
    return json.loads(json.dumps(_CHARTS[name]))  # deep copy


def background(name: str) -> np.ndarray:
    return _BACKGROUNDS[name](_rng(name))


def prompt_for(name: str) -> str:
    return _PROMPTS[name]


def write_fixtures(outdir) -> list:
    """Write every pairing's chart JSON + background PNG; returns paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    pairings = []
    for name in pairing_names():
        chart_path = outdir / f"{name}.json"
        bg_path = outdir / f"{name}.png"
        chart_path.write_text(
            json.dumps(chart_document(name), indent=2) + "\n", encoding="utf-8"
        )
        write_png(bg_path, background(name))
        pairings.append({
            "name": name,
            "chart": chart_path.name,
            "background": bg_path.name,
            "prompt": prompt_for(name),
        })
        written += [chart_path, bg_path]
    index = outdir / "pairings.json"
    index.write_text(json.dumps(pairings, indent=2) + "\n", encoding="utf-8")
    written.append(index)
    return written


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    paths = write_fixtures(target)
    print(f"wrote {len(paths)} files to {target}")
