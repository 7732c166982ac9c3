"""Declarative chart grammar: parsing, validation, and mark geometry.

The document format is a small closed JSON schema (see docs/chart-spec.md):
one idiom per document, one dataset shape per idiom, no layering or faceting.
``layout_chart`` turns a parsed spec into concrete mark geometry in pixel
space; idioms with non-trivial layout math (streamgraph silhouette, layered
tree) have their core computations exposed as standalone functions so they
can be checked independently.

Coordinate conventions: x grows right, y grows DOWN (raster space). Pie
angles are degrees measured clockwise from 12 o'clock. Vector-field and
value axes treat larger data values as "up", i.e. smaller screen y.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .errors import LayoutError, SpecError


class Idiom(str, Enum):
    BAR = "bar"
    LINE = "line"
    SCATTER = "scatter"
    AREA = "area"
    PIE = "pie"
    VECTOR_FIELD = "vector_field"
    TREE = "tree"
    STREAMGRAPH = "streamgraph"


class MarkKind(str, Enum):
    RECT = "rect"
    POLYLINE = "polyline"
    POINT = "point"
    WEDGE = "wedge"
    ARROW = "arrow"
    REGION = "region"


# Dataset shape required by each idiom.
_IDIOM_DATA = {
    Idiom.BAR: "series",
    Idiom.LINE: "series",
    Idiom.AREA: "series",
    Idiom.STREAMGRAPH: "series",
    Idiom.PIE: "series",
    Idiom.SCATTER: "points",
    Idiom.VECTOR_FIELD: "field",
    Idiom.TREE: "tree",
}

# Closed per-idiom option keys; anything else is rejected at parse time.
_IDIOM_OPTIONS = {
    Idiom.BAR: {"gap_fraction"},
    Idiom.LINE: set(),
    Idiom.SCATTER: set(),
    Idiom.AREA: set(),
    Idiom.PIE: {"radius"},
    Idiom.VECTOR_FIELD: {"arrow_length"},
    Idiom.TREE: {"node_radius"},
    Idiom.STREAMGRAPH: set(),
}

_TOP_LEVEL_KEYS = {"idiom", "canvas", "data", "style", "options"}

MIN_CANVAS = 16

DEFAULT_STROKE_WIDTH = 2.0
DEFAULT_MARK_SIZE = 6.0
DEFAULT_MARGIN = 10.0


@dataclass(frozen=True)
class StyleSpec:
    stroke_width: float = DEFAULT_STROKE_WIDTH
    mark_size: float = DEFAULT_MARK_SIZE
    margin: float = DEFAULT_MARGIN
    draw_labels: bool = False


@dataclass(frozen=True)
class TreeNode:
    id: str
    parent: Optional[str]  # None for the root


@dataclass(frozen=True)
class Dataset:
    """Exactly one of the four shapes is populated."""

    series: Optional[tuple] = None  # tuple of (label, tuple of values)
    points: Optional[tuple] = None  # tuple of (x, y)
    grid: Optional[tuple] = None    # tuple of rows, each a tuple of (dx, dy)
    tree: Optional[tuple] = None    # tuple of TreeNode

    @property
    def kind(self) -> str:
        for name in ("series", "points", "grid", "tree"):
            if getattr(self, name) is not None:
                return "field" if name == "grid" else name
        raise ValueError("empty dataset")


@dataclass(frozen=True)
class ChartSpec:
    idiom: Idiom
    data: Dataset
    canvas: tuple  # (width, height) px
    style: StyleSpec = field(default_factory=StyleSpec)
    options: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MarkGeometry:
    """One drawable mark.

    ``vertices`` is a tuple of (x, y) px; its meaning depends on ``kind``:
    rect -> two opposite corners, polyline/region -> the path, point -> one
    center, wedge -> the center (radius/angles in params), arrow -> tail and
    tip. ``depth_layer`` 0 is frontmost.
    """

    kind: MarkKind
    vertices: tuple
    series: int = 0
    depth_layer: int = 0
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScaleMeta:
    domain: tuple      # (min, max) in data units
    range_px: tuple    # (start, end) px along the axis
    degenerate: bool = False  # all-zero data forced to [0, 1]


@dataclass(frozen=True)
class LayoutResult:
    marks: tuple
    plot_area: tuple   # (x, y, w, h) px
    scale_meta: dict   # axis name -> ScaleMeta
    labels: tuple = ()  # (text, x, y) px, only when style.draw_labels


# ---------------------------------------------------------------------------
# parsing


def parse_spec(text: str) -> ChartSpec:
    """Parse a chart-spec document. Raises SpecError with a position on
    syntax errors and without one on semantic violations."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            position=(exc.lineno, exc.colno),
        ) from exc
    if not isinstance(doc, dict):
        raise SpecError("document root must be an object")

    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise SpecError(f"unknown top-level keys: {sorted(unknown)}")
    for key in ("idiom", "canvas", "data"):
        if key not in doc:
            raise SpecError(f"missing required key: {key!r}")

    try:
        idiom = Idiom(doc["idiom"])
    except ValueError:
        raise SpecError(f"unknown idiom: {doc['idiom']!r}") from None

    canvas = _parse_canvas(doc["canvas"])
    data = _parse_dataset(doc["data"])
    style = _parse_style(doc.get("style", {}))
    options = _parse_options(idiom, doc.get("options", {}))

    need = _IDIOM_DATA[idiom]
    if data.kind != need:
        raise SpecError(
            f"dataset/idiom mismatch: idiom {idiom.value!r} needs {need!r} data, "
            f"got {data.kind!r}"
        )
    return ChartSpec(idiom=idiom, data=data, canvas=canvas, style=style, options=options)


def _parse_canvas(obj) -> tuple:
    if not isinstance(obj, dict) or set(obj) != {"width", "height"}:
        raise SpecError("canvas must be an object with keys width, height")
    w, h = obj["width"], obj["height"]
    if not all(isinstance(v, (int, float)) and v == int(v) for v in (w, h)):
        raise SpecError("canvas dimensions must be integers")
    w, h = int(w), int(h)
    if w < MIN_CANVAS or h < MIN_CANVAS:
        raise SpecError(f"canvas dimensions must be >= {MIN_CANVAS} px, got {w}x{h}")
    return (w, h)


def _parse_style(obj) -> StyleSpec:
    if not isinstance(obj, dict):
        raise SpecError("style must be an object")
    allowed = {"stroke_width", "mark_size", "margin", "draw_labels"}
    unknown = set(obj) - allowed
    if unknown:
        raise SpecError(f"unknown style keys: {sorted(unknown)}")
    style = StyleSpec(
        stroke_width=float(obj.get("stroke_width", DEFAULT_STROKE_WIDTH)),
        mark_size=float(obj.get("mark_size", DEFAULT_MARK_SIZE)),
        margin=float(obj.get("margin", DEFAULT_MARGIN)),
        draw_labels=bool(obj.get("draw_labels", False)),
    )
    if style.stroke_width <= 0 or style.mark_size <= 0 or style.margin < 0:
        raise SpecError("stroke_width and mark_size must be > 0, margin >= 0")
    return style


def _parse_options(idiom: Idiom, obj) -> dict:
    if not isinstance(obj, dict):
        raise SpecError("options must be an object")
    allowed = _IDIOM_OPTIONS[idiom]
    unknown = set(obj) - allowed
    if unknown:
        raise SpecError(
            f"unknown options for idiom {idiom.value!r}: {sorted(unknown)} "
            f"(allowed: {sorted(allowed) or 'none'})"
        )
    out = {}
    for key, value in obj.items():
        value = float(value)
        if key == "gap_fraction":
            if not 0.0 <= value <= 0.9:
                raise SpecError("gap_fraction must be in [0, 0.9]")
        elif value <= 0:
            raise SpecError(f"option {key!r} must be > 0")
        out[key] = value
    return out


def _parse_dataset(obj) -> Dataset:
    if not isinstance(obj, dict):
        raise SpecError("data must be an object")
    shapes = {"series", "points", "field", "tree"} & set(obj)
    if len(shapes) != 1 or set(obj) - {"series", "points", "field", "tree"}:
        raise SpecError(
            "data must contain exactly one of: series, points, field, tree"
        )
    shape = shapes.pop()
    if shape == "series":
        return Dataset(series=_parse_series(obj["series"]))
    if shape == "points":
        return Dataset(points=_parse_points(obj["points"]))
    if shape == "field":
        return Dataset(grid=_parse_field(obj["field"]))
    return Dataset(tree=_parse_tree(obj["tree"]))


def _parse_series(obj) -> tuple:
    if not isinstance(obj, list) or not obj:
        raise SpecError("series must be a non-empty list")
    out = []
    length = None
    for i, entry in enumerate(obj):
        if not isinstance(entry, dict) or set(entry) != {"label", "values"}:
            raise SpecError(f"series[{i}] must be an object with keys label, values")
        values = entry["values"]
        if not isinstance(values, list) or not values:
            raise SpecError(f"series[{i}].values must be a non-empty list")
        for v in values:
            if not isinstance(v, (int, float)) or isinstance(v, bool) or v < 0:
                raise SpecError(f"series[{i}] values must be non-negative numbers")
        if length is None:
            length = len(values)
        elif len(values) != length:
            raise SpecError(
                f"ragged series: series[{i}] has {len(values)} values, expected {length}"
            )
        out.append((str(entry["label"]), tuple(float(v) for v in values)))
    return tuple(out)


def _parse_points(obj) -> tuple:
    if not isinstance(obj, list) or not obj:
        raise SpecError("points must be a non-empty list")
    out = []
    for i, pt in enumerate(obj):
        if (
            not isinstance(pt, list)
            or len(pt) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pt)
        ):
            raise SpecError(f"points[{i}] must be a [x, y] pair of numbers")
        if pt[0] < 0 or pt[1] < 0:
            raise SpecError(f"points[{i}] must be non-negative (default [0, max] scales)")
        out.append((float(pt[0]), float(pt[1])))
    return tuple(out)


def _parse_field(obj) -> tuple:
    if not isinstance(obj, list) or not obj:
        raise SpecError("field must be a non-empty list of rows")
    width = None
    rows = []
    for r, row in enumerate(obj):
        if not isinstance(row, list) or not row:
            raise SpecError(f"field row {r} must be a non-empty list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SpecError(f"field is not rectangular: row {r} has {len(row)} cells, expected {width}")
        cells = []
        for c, vec in enumerate(row):
            if (
                not isinstance(vec, list)
                or len(vec) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vec)
            ):
                raise SpecError(f"field cell ({r},{c}) must be a [dx, dy] pair")
            cells.append((float(vec[0]), float(vec[1])))
        rows.append(tuple(cells))
    return tuple(rows)


def _parse_tree(obj) -> tuple:
    if not isinstance(obj, list) or not obj:
        raise SpecError("tree must be a non-empty node list")
    nodes = []
    ids = set()
    for i, entry in enumerate(obj):
        if not isinstance(entry, dict) or set(entry) != {"id", "parent"}:
            raise SpecError(f"tree node {i} must be an object with keys id, parent")
        nid = str(entry["id"])
        if nid in ids:
            raise SpecError(f"duplicate tree node id {nid!r}")
        ids.add(nid)
        parent = entry["parent"]
        nodes.append(TreeNode(id=nid, parent=None if parent is None else str(parent)))

    roots = [n for n in nodes if n.parent is None]
    if len(roots) != 1:
        raise SpecError(f"tree must have exactly one root, found {len(roots)}")
    for n in nodes:
        if n.parent is not None and n.parent not in ids:
            raise SpecError(f"tree node {n.id!r} references unknown parent {n.parent!r}")
    _check_acyclic(nodes)
    return tuple(nodes)


def _check_acyclic(nodes: Sequence[TreeNode]) -> None:
    parent = {n.id: n.parent for n in nodes}
    for start in parent:
        seen = set()
        cur = start
        while cur is not None:
            if cur in seen:
                raise SpecError(f"tree contains a cycle through node {cur!r}")
            seen.add(cur)
            cur = parent[cur]


# ---------------------------------------------------------------------------
# serialization (canonical field ordering, byte-stable round trip)


def serialize_spec(spec: ChartSpec) -> str:
    doc = {
        "idiom": spec.idiom.value,
        "canvas": {"width": spec.canvas[0], "height": spec.canvas[1]},
        "data": _dataset_doc(spec.data),
        "style": {
            "stroke_width": spec.style.stroke_width,
            "mark_size": spec.style.mark_size,
            "margin": spec.style.margin,
            "draw_labels": spec.style.draw_labels,
        },
        "options": {k: spec.options[k] for k in sorted(spec.options)},
    }
    return json.dumps(doc, indent=2) + "\n"


def _dataset_doc(data: Dataset) -> dict:
    if data.series is not None:
        return {"series": [{"label": l, "values": list(v)} for l, v in data.series]}
    if data.points is not None:
        return {"points": [[x, y] for x, y in data.points]}
    if data.grid is not None:
        return {"field": [[[dx, dy] for dx, dy in row] for row in data.grid]}
    return {"tree": [{"id": n.id, "parent": n.parent} for n in data.tree]}


# ---------------------------------------------------------------------------
# layout


def layout_chart(spec: ChartSpec) -> LayoutResult:
    """Position every mark of the chart with linear [0, max] scales.

    All-zero data never errors: the scale domain is forced to [0, 1] and
    flagged degenerate in scale_meta, so an "empty" chart still composes.
    """
    plot = _plot_area(spec)
    dispatch = {
        Idiom.BAR: _layout_bar,
        Idiom.LINE: _layout_line,
        Idiom.SCATTER: _layout_scatter,
        Idiom.AREA: _layout_area,
        Idiom.PIE: _layout_pie,
        Idiom.VECTOR_FIELD: _layout_vector_field,
        Idiom.TREE: lambda s, p: _tree_layout(s.data.tree, p, s.style, s.options),
        Idiom.STREAMGRAPH: _layout_streamgraph,
    }
    result = dispatch[spec.idiom](spec, plot)
    if spec.style.draw_labels:
        result = LayoutResult(
            marks=result.marks,
            plot_area=result.plot_area,
            scale_meta=result.scale_meta,
            labels=_legend_labels(spec, plot),
        )
    return result


def _plot_area(spec: ChartSpec) -> tuple:
    w, h = spec.canvas
    m = spec.style.margin
    pw, ph = w - 2 * m, h - 2 * m
    if pw <= 0 or ph <= 0:
        raise LayoutError(
            f"canvas {w}x{h} too small for margin {m} (plot area {pw}x{ph})"
        )
    return (m, m, pw, ph)


def _value_scale(values) -> tuple:
    """Return (domain_max, degenerate) for a [0, max] scale."""
    vmax = max(values) if values else 0.0
    if vmax <= 0:
        return 1.0, True
    return float(vmax), False


def _legend_labels(spec: ChartSpec, plot: tuple) -> tuple:
    if spec.data.series is None:
        return ()
    px, py = plot[0], plot[1]
    return tuple(
        (label, px + 2.0, py + 2.0 + 9.0 * i)
        for i, (label, _values) in enumerate(spec.data.series)
    )


def _layout_bar(spec: ChartSpec, plot: tuple) -> LayoutResult:
    px, py, pw, ph = plot
    series = spec.data.series
    gap = spec.options.get("gap_fraction", 0.2)
    nx = len(series[0][1])
    ns = len(series)
    dmax, degenerate = _value_scale([v for _l, vs in series for v in vs])

    slot_w = pw / nx
    group_w = slot_w * (1.0 - gap)
    bar_w = group_w / ns
    bottom = py + ph

    marks = []
    for s, (_label, values) in enumerate(series):
        for i, v in enumerate(values):
            x0 = px + i * slot_w + (slot_w - group_w) / 2.0 + s * bar_w
            height = v / dmax * ph
            marks.append(
                MarkGeometry(
                    kind=MarkKind.RECT,
                    vertices=((x0, bottom - height), (x0 + bar_w, bottom)),
                    series=s,
                )
            )
    return LayoutResult(
        marks=tuple(marks),
        plot_area=plot,
        scale_meta={
            "x": ScaleMeta((0.0, float(nx)), (px, px + pw)),
            "y": ScaleMeta((0.0, dmax), (py + ph, py), degenerate),
        },
    )


def _series_xs(n: int, px: float, pw: float):
    if n == 1:
        return [px + pw / 2.0]
    return [px + i * pw / (n - 1) for i in range(n)]


def _layout_line(spec: ChartSpec, plot: tuple) -> LayoutResult:
    px, py, pw, ph = plot
    series = spec.data.series
    dmax, degenerate = _value_scale([v for _l, vs in series for v in vs])
    bottom = py + ph
    xs = _series_xs(len(series[0][1]), px, pw)

    marks = []
    for s, (_label, values) in enumerate(series):
        pts = tuple((xs[i], bottom - v / dmax * ph) for i, v in enumerate(values))
        marks.append(
            MarkGeometry(kind=MarkKind.POLYLINE, vertices=pts, series=s, depth_layer=s)
        )
    return LayoutResult(
        marks=tuple(marks),
        plot_area=plot,
        scale_meta={
            "x": ScaleMeta((0.0, float(len(xs) - 1 or 1)), (px, px + pw)),
            "y": ScaleMeta((0.0, dmax), (py + ph, py), degenerate),
        },
    )


def _layout_scatter(spec: ChartSpec, plot: tuple) -> LayoutResult:
    px, py, pw, ph = plot
    points = spec.data.points
    xmax, xdeg = _value_scale([p[0] for p in points])
    ymax, ydeg = _value_scale([p[1] for p in points])
    bottom = py + ph

    marks = tuple(
        MarkGeometry(
            kind=MarkKind.POINT,
            vertices=((px + x / xmax * pw, bottom - y / ymax * ph),),
            params={"size": spec.style.mark_size},
        )
        for x, y in points
    )
    return LayoutResult(
        marks=marks,
        plot_area=plot,
        scale_meta={
            "x": ScaleMeta((0.0, xmax), (px, px + pw), xdeg),
            "y": ScaleMeta((0.0, ymax), (py + ph, py), ydeg),
        },
    )


def _layout_area(spec: ChartSpec, plot: tuple) -> LayoutResult:
    px, py, pw, ph = plot
    series = spec.data.series
    dmax, degenerate = _value_scale([v for _l, vs in series for v in vs])
    bottom = py + ph
    xs = _series_xs(len(series[0][1]), px, pw)

    marks = []
    for s, (_label, values) in enumerate(series):
        top = [(xs[i], bottom - v / dmax * ph) for i, v in enumerate(values)]
        base = [(xs[i], bottom) for i in range(len(values) - 1, -1, -1)]
        marks.append(
            MarkGeometry(
                kind=MarkKind.REGION,
                vertices=tuple(top + base),
                series=s,
                depth_layer=s,
            )
        )
    return LayoutResult(
        marks=tuple(marks),
        plot_area=plot,
        scale_meta={
            "x": ScaleMeta((0.0, float(len(xs) - 1 or 1)), (px, px + pw)),
            "y": ScaleMeta((0.0, dmax), (py + ph, py), degenerate),
        },
    )


def _layout_pie(spec: ChartSpec, plot: tuple) -> LayoutResult:
    px, py, pw, ph = plot
    if len(spec.data.series) != 1:
        raise LayoutError("pie charts take exactly one series (one value per slice)")
    _label, values = spec.data.series[0]
    cx, cy = px + pw / 2.0, py + ph / 2.0
    radius = spec.options.get("radius", min(pw, ph) / 2.0)
    radius = min(radius, pw / 2.0, ph / 2.0)

    total = math.fsum(values)
    degenerate = total <= 0
    marks = []
    if degenerate:
        # Equal angular shares keep the 360-degree invariant for all-zero data.
        n = len(values)
        bounds = [360.0 * k / n for k in range(n + 1)]
    else:
        cum = 0.0
        bounds = [0.0]
        for v in values:
            cum += v
            bounds.append(cum / total * 360.0)
    for k in range(len(values)):
        marks.append(
            MarkGeometry(
                kind=MarkKind.WEDGE,
                vertices=((cx, cy),),
                series=k,  # per-slice colour index
                params={"radius": radius, "start_deg": bounds[k], "end_deg": bounds[k + 1]},
            )
        )
    return LayoutResult(
        marks=tuple(marks),
        plot_area=plot,
        scale_meta={
            "angle": ScaleMeta((0.0, total if not degenerate else 1.0), (0.0, 360.0), degenerate)
        },
    )


def _layout_vector_field(spec: ChartSpec, plot: tuple) -> LayoutResult:
    px, py, pw, ph = plot
    grid = spec.data.grid
    rows, cols = len(grid), len(grid[0])
    cell_w, cell_h = pw / cols, ph / rows
    cap = spec.options.get("arrow_length", min(cell_w, cell_h))
    cap = min(cap, cell_w, cell_h)

    mags = [math.hypot(dx, dy) for row in grid for dx, dy in row]
    mmax, degenerate = _value_scale(mags)

    marks = []
    for r, row in enumerate(grid):
        for c, (dx, dy) in enumerate(row):
            cx = px + (c + 0.5) * cell_w
            cy = py + (r + 0.5) * cell_h
            mag = math.hypot(dx, dy)
            length = mag / mmax * cap if mag > 0 else 0.0
            if length > 0:
                ux, uy = dx / mag, -dy / mag  # data y is up, screen y is down
                half = length / 2.0
                tail = (cx - ux * half, cy - uy * half)
                tip = (cx + ux * half, cy + uy * half)
            else:
                tail = tip = (cx, cy)
            marks.append(
                MarkGeometry(
                    kind=MarkKind.ARROW,
                    vertices=(tail, tip),
                    params={"head": max(2.0, length * 0.3)},
                )
            )
    return LayoutResult(
        marks=tuple(marks),
        plot_area=plot,
        scale_meta={
            "magnitude": ScaleMeta((0.0, mmax), (0.0, cap), degenerate),
        },
    )


# ---------------------------------------------------------------------------
# streamgraph


def streamgraph_baseline(columns: Sequence[Sequence[float]]):
    """Layer boundaries for a symmetric-silhouette streamgraph.

    ``columns[x]`` holds the per-series values at position x. Returns, per x,
    the k+1 layer boundaries: the baseline -total/2 followed by the running
    sums, so layer k spans boundaries [k, k+1] and the stack is symmetric
    about zero.
    """
    if not columns:
        raise LayoutError("streamgraph needs at least one column")
    k = len(columns[0])
    out = []
    for x, col in enumerate(columns):
        if len(col) != k:
            raise LayoutError(
                f"ragged streamgraph data: column {x} has {len(col)} series, expected {k}"
            )
        total = math.fsum(col)
        g0 = -0.5 * total
        bounds = [g0]
        cum = g0
        for v in col:
            cum += v
            bounds.append(cum)
        out.append(bounds)
    return out


def _layout_streamgraph(spec: ChartSpec, plot: tuple) -> LayoutResult:
    px, py, pw, ph = plot
    series = spec.data.series
    nx = len(series[0][1])
    columns = [[vs[i] for _l, vs in series] for i in range(nx)]
    bounds = streamgraph_baseline(columns)

    totals = [math.fsum(col) for col in columns]
    gmax, degenerate = _value_scale(totals)
    pp = ph / gmax
    mid = py + ph / 2.0
    xs = _series_xs(nx, px, pw)

    marks = []
    for s in range(len(series)):
        top = [(xs[i], mid - bounds[i][s + 1] * pp) for i in range(nx)]
        bottom = [(xs[i], mid - bounds[i][s] * pp) for i in range(nx - 1, -1, -1)]
        marks.append(
            MarkGeometry(
                kind=MarkKind.REGION,
                vertices=tuple(top + bottom),
                series=s,
                depth_layer=s,
            )
        )
    return LayoutResult(
        marks=tuple(marks),
        plot_area=plot,
        scale_meta={
            "x": ScaleMeta((0.0, float(nx - 1 or 1)), (px, px + pw)),
            "thickness": ScaleMeta((0.0, gmax), (py + ph, py), degenerate),
        },
    )


# ---------------------------------------------------------------------------
# tree


def compute_tree_slots(nodes: Sequence[TreeNode]):
    """Layered positions in abstract units: node id -> (depth, slot).

    Leaves take consecutive integer slots left-to-right in document order;
    every internal node sits at the mean of its children's slots.
    """
    children = {n.id: [] for n in nodes}
    root = None
    for n in nodes:
        if n.parent is None:
            root = n.id
        else:
            children[n.parent].append(n.id)

    slots = {}
    depths = {}
    next_leaf = [0]

    def walk(nid: str, depth: int) -> float:
        depths[nid] = depth
        kids = children[nid]
        if not kids:
            slot = float(next_leaf[0])
            next_leaf[0] += 1
        else:
            slot = math.fsum(walk(k, depth + 1) for k in kids) / len(kids)
        slots[nid] = slot
        return slot

    walk(root, 0)
    return {nid: (depths[nid], slots[nid]) for nid in slots}


def tidy_tree_layout(nodes: Sequence[TreeNode], canvas: tuple,
                     style: Optional[StyleSpec] = None,
                     options: Optional[dict] = None) -> LayoutResult:
    """Layered tree layout on a canvas: depth maps to y, leaf slots to x."""
    style = style or StyleSpec()
    spec_like = ChartSpec(
        idiom=Idiom.TREE, data=Dataset(tree=tuple(nodes)), canvas=canvas, style=style
    )
    return _tree_layout(tuple(nodes), _plot_area(spec_like), style, options or {})


def _tree_layout(nodes, plot, style, options) -> LayoutResult:
    px, py, pw, ph = plot
    positions = compute_tree_slots(nodes)
    child_count = {n.id: 0 for n in nodes}
    for n in nodes:
        if n.parent is not None:
            child_count[n.parent] += 1
    n_leaves = sum(1 for n in nodes if child_count[n.id] == 0)
    max_depth = max(d for d, _s in positions.values())

    slot_w = pw / n_leaves
    row_h = ph / max_depth if max_depth > 0 else 0.0

    def to_px(nid):
        depth, slot = positions[nid]
        x = px + (slot + 0.5) * slot_w
        y = py + depth * row_h if max_depth > 0 else py + ph / 2.0
        return (x, y)

    radius = options.get("node_radius", style.mark_size)
    marks = []
    for n in nodes:
        if n.parent is not None:
            marks.append(
                MarkGeometry(
                    kind=MarkKind.POLYLINE,
                    vertices=(to_px(n.parent), to_px(n.id)),
                    depth_layer=1,
                )
            )
    for n in nodes:
        marks.append(
            MarkGeometry(
                kind=MarkKind.POINT,
                vertices=(to_px(n.id),),
                params={"size": radius},
                depth_layer=0,
            )
        )
    return LayoutResult(
        marks=tuple(marks),
        plot_area=plot,
        scale_meta={
            "slot": ScaleMeta((0.0, float(n_leaves)), (px, px + pw)),
            "depth": ScaleMeta((0.0, float(max_depth or 1)), (py, py + ph)),
        },
    )
