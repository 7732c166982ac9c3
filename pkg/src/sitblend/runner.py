"""End-to-end pipeline execution and artifact persistence.

One run = render the chart, extract its outline control map, place and
compose it into background space, generate through the backend with two
control units (style = the raw environment photo, outline = the composed
map), optionally tile-upscale, verify legibility, and write the whole
artifact set plus manifest into a run directory.

Stage failures surface as StageError with the stage name, so callers
(sessions, the service, the CLI) can report exactly where a run died.
"""

from __future__ import annotations

import json
import time
import uuid
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .chartspec import ChartSpec, serialize_spec
from .compose import ComposeMode, compose_maps, place_map, plan_placement
from .config import RunConfig, config_to_dict
from .control import ControlKind, canny, scribble_thin, softedge_dog
from .diffusion import (
    ControlUnit,
    DiffusionClient,
    GenerationRequest,
    ROLE_OUTLINE,
    ROLE_STYLE,
    pad_to_multiple,
)
from .errors import SitblendError, StageError
from .legibility import LegibilityReport, verify_legibility
from .manifest import RunManifest, hash_bytes, now_utc, write_manifest
from .png import write_png
from .raster import render_chart
from .resample import resample_to
from .upscale import upscale_tiled


@dataclass(frozen=True)
class RunResult:
    run_id: str
    run_dir: Path
    manifest: RunManifest
    report: LegibilityReport
    output: np.ndarray
    upscaled: Optional[np.ndarray] = None


@contextmanager
def _stage(name: str, timing: dict):
    start = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except SitblendError as exc:
        raise StageError(name, str(exc)) from exc
    except Exception as exc:  # noqa: BLE001 - every failure needs its stage
        raise StageError(name, f"{type(exc).__name__}: {exc}") from exc
    finally:
        timing[name] = (time.perf_counter() - start) * 1000.0


def _extract_outline(pixels: np.ndarray, cfg: RunConfig) -> np.ndarray:
    kind = cfg.outline_kind
    if kind == ControlKind.CANNY:
        return canny(pixels, low=cfg.canny.low, high=cfg.canny.high, sigma=cfg.canny.sigma)
    if kind == ControlKind.SCRIBBLE:
        return scribble_thin(pixels)
    return softedge_dog(pixels, sigma1=cfg.dog.sigma1, sigma2=cfg.dog.sigma2)


def prepare_background(background: np.ndarray, max_side: int) -> tuple:
    """Clamp the background to max_side; returns (image, resized_flag)."""
    arr = np.asarray(background)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise StageError("compose", f"background must be (H,W,3) uint8, got {arr.shape} {arr.dtype}")
    h, w = arr.shape[:2]
    longest = max(h, w)
    if longest <= max_side:
        return arr, False
    factor = max_side / longest
    new_w = max(1, int(np.floor(w * factor + 0.5)))
    new_h = max(1, int(np.floor(h * factor + 0.5)))
    return resample_to(arr, (new_w, new_h), method="bilinear"), True


def execute_run(spec: ChartSpec, background: np.ndarray, config: RunConfig,
                client: DiffusionClient, run_dir, run_id: Optional[str] = None,
                backend_is_mock: bool = False) -> RunResult:
    run_id = run_id or uuid.uuid4().hex[:12]
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)

    timing: dict = {}
    artifacts: dict = {}
    hashes: dict = {}
    extra: dict = {}

    def save(name: str, filename: str, image: np.ndarray) -> None:
        data = write_png(run_dir / filename, image)
        artifacts[name] = filename
        hashes[name] = hash_bytes(data)

    with _stage("render", timing):
        rendered = render_chart(spec)
        save("chart", "chart.png", rendered.pixels)

    with _stage("extract", timing):
        outline = _extract_outline(rendered.pixels, config)

    with _stage("compose", timing):
        bg, resized = prepare_background(background, config.max_side)
        bh, bw = bg.shape[:2]
        extra["background_size"] = [bw, bh]
        extra["background_resized"] = resized

        transform = plan_placement(
            (spec.canvas[0], spec.canvas[1]), (bw, bh),
            relative_scale=config.placement.relative_scale,
            anchor=config.placement.anchor,
            offset_px=config.placement.offset_px,
        )
        extra["placement"] = {
            "scale": transform.scale,
            "offset": list(transform.offset),
            "placed_size": list(transform.placed_size),
            "clamped": transform.clamped,
        }
        placed = place_map(outline, transform, (bw, bh), kind=config.outline_kind)
        if config.compose.mode == ComposeMode.BLEND:
            bg_edges = canny(bg, low=config.canny.low, high=config.canny.high,
                             sigma=config.canny.sigma)
            composed = compose_maps(
                placed, bg_edges, mode=ComposeMode.BLEND,
                chart_weight=config.compose.chart_weight,
                background_weight=config.compose.background_weight,
                combine=config.compose.combine,
            )
        else:
            composed = compose_maps(
                placed, mode=ComposeMode.ADDITIVE,
                chart_weight=config.compose.chart_weight,
            )
        save("background", "background.png", bg)
        save("outline", "outline.png", composed)

    with _stage("generate", timing):
        bg_pad = pad_to_multiple(bg)
        composed_pad = pad_to_multiple(composed)
        # maps are zero beyond the placed rect; keep the padding zero too
        if composed_pad.shape != composed.shape:
            composed_pad = composed_pad.copy()
            composed_pad[bh:, :] = 0
            composed_pad[:, bw:] = 0
        ph, pw = bg_pad.shape[:2]
        extra["request_size"] = [pw, ph]
        request = GenerationRequest(
            prompt=config.generation.prompt,
            negative_prompt=config.generation.negative_prompt,
            seed=config.generation.seed,
            steps=config.generation.steps,
            cfg_scale=config.generation.cfg_scale,
            denoising_strength=config.denoising_strength,
            width=pw, height=ph,
            init_image=bg_pad,
            controls=(
                ControlUnit(role=ROLE_STYLE, image=bg_pad,
                            weight=config.generation.style_weight),
                ControlUnit(role=ROLE_OUTLINE, image=composed_pad,
                            weight=config.generation.outline_weight),
            ),
        )
        result = client.generate(request)
        output = result.image[:bh, :bw]
        extra["backend_seed"] = result.seed
        save("output", "output.png", output)

    upscaled = None
    if config.upscale.enabled:
        with _stage("upscale", timing):
            upscaled = upscale_tiled(
                output, factor=config.upscale.factor,
                grid=config.upscale.grid, overlap=config.upscale.overlap,
            )
            save("upscaled", "upscaled.png", upscaled)

    with _stage("verify", timing):
        report = verify_legibility(
            output, composed, layout=rendered.layout, transform=transform,
            tolerance_px=config.verify.tolerance_px,
            radius=config.verify.radius,
            alignment_threshold=config.verify.alignment_threshold,
            canny_params={"low": config.verify.detect_low,
                          "high": config.verify.detect_high},
            map_kind=config.outline_kind,
        )
        report_text = report.to_json()
        (run_dir / "legibility.json").write_text(report_text, encoding="utf-8")
        artifacts["legibility"] = "legibility.json"
        hashes["legibility"] = hash_bytes(report_text.encode("utf-8"))

    with _stage("manifest", timing):
        manifest = RunManifest(
            run_id=run_id,
            created_at=now_utc(),
            config=config_to_dict(config),
            chart_spec=json.loads(serialize_spec(spec)),
            artifacts=artifacts,
            hashes=hashes,
            backend={"url": client.base_url, "mock": backend_is_mock},
            timing_ms=timing,
            extra=extra,
        )
        write_manifest(manifest, run_dir / "manifest.json")

    return RunResult(
        run_id=run_id, run_dir=run_dir, manifest=manifest,
        report=report, output=output, upscaled=upscaled,
    )
