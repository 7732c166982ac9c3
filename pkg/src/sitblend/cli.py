"""Command-line interface: thin wrappers over the library stages.

Every subcommand maps onto one pipeline stage (render, extract, compose,
generate, upscale, verify) plus ``run`` for the whole thing and ``serve``
for the HTTP service. ``--mock`` starts the deterministic in-process
backend so everything works without a GPU box on the network.
"""

from __future__ import annotations

import contextlib
import json
import os
import sys
import uuid
from pathlib import Path

import click

from . import __version__
from .chartspec import parse_spec
from .compose import ComposeMode, compose_maps, place_map, plan_placement
from .config import config_from_dict, load_config, merge_overrides
from .control import ControlKind, canny, extract_control
from .diffusion import (
    ControlUnit,
    DiffusionClient,
    GenerationRequest,
    ROLE_OUTLINE,
    ROLE_STYLE,
)
from .errors import SitblendError, StageError
from .legibility import verify_legibility
from .manifest import read_manifest, stable_hash
from .mockbackend import MockBackendServer
from .png import read_png, write_png
from .raster import render_chart
from .runner import execute_run
from .upscale import upscale_tiled

ENV_BACKEND = "SITBLEND_BACKEND_URL"
ENV_DATA_DIR = "SITBLEND_DATA_DIR"


@contextlib.contextmanager
def _cli_errors():
    try:
        yield
    except StageError as exc:
        click.echo(f"error [{exc.stage}]: {exc.message}", err=True)
        sys.exit(2)
    except SitblendError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


@contextlib.contextmanager
def _client_for(mock: bool, backend: str, timeout: float = 120.0):
    """Yield (client, is_mock); owns a mock server's lifetime when asked."""
    if mock:
        with MockBackendServer() as server:
            yield DiffusionClient(server.url, timeout=timeout), True
        return
    url = backend or os.environ.get(ENV_BACKEND)
    if not url:
        raise SitblendError(
            f"no backend: pass --backend URL, --mock, or set {ENV_BACKEND}"
        )
    yield DiffusionClient(url, timeout=timeout), False


def _parse_grid(_ctx, _param, value):
    try:
        rows, cols = value.lower().split("x")
        return (int(rows), int(cols))
    except ValueError:
        raise click.BadParameter(f"expected ROWSxCOLS, e.g. 8x8, got {value!r}") from None


@click.group()
@click.version_option(version=__version__)
def main():
    """Blend data visualisations into photographs of real environments."""


@main.command()
@click.argument("spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
@click.option("--supersample", default=1, show_default=True,
              help="render at NxN and box-filter down (anti-aliasing)")
def render(spec_path, out, supersample):
    """Rasterize a chart-spec document to PNG."""
    with _cli_errors():
        spec = parse_spec(Path(spec_path).read_text(encoding="utf-8"))
        rendered = render_chart(spec, supersample=supersample)
        write_png(out, rendered.pixels)
        click.echo(f"wrote {out} ({spec.canvas[0]}x{spec.canvas[1]})")


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--kind", type=click.Choice(["canny", "scribble", "softedge", "hed"]),
              default="canny", show_default=True)
@click.option("--low", default=50.0, show_default=True)
@click.option("--high", default=100.0, show_default=True)
@click.option("--sigma", default=1.4, show_default=True)
@click.option("--sigma1", default=1.0, show_default=True)
@click.option("--sigma2", default=2.0, show_default=True)
@click.option("--invert", is_flag=True, help="thin the bright side instead of the dark")
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def extract(image, kind, low, high, sigma, sigma1, sigma2, invert, out):
    """Extract a control map from an image."""
    with _cli_errors():
        pixels = read_png(image)
        kind = ControlKind(kind)
        if kind == ControlKind.CANNY:
            params = {"low": low, "high": high, "sigma": sigma}
        elif kind == ControlKind.SCRIBBLE:
            params = {"invert": invert}
        else:
            params = {"sigma1": sigma1, "sigma2": sigma2}
        result = extract_control(pixels, kind, **params)
        write_png(out, result.pixels)
        click.echo(f"wrote {out} ({kind.value})")


@main.command()
@click.argument("chart_map", type=click.Path(exists=True, dir_okay=False))
@click.argument("background", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["additive", "blend"]),
              default="additive", show_default=True)
@click.option("--map-kind", type=click.Choice(["canny", "scribble", "softedge", "hed"]),
              default="canny", show_default=True,
              help="what the chart map is; binary kinds rescale with nearest")
@click.option("--relative-scale", default=0.6, show_default=True)
@click.option("--anchor", type=click.Choice(["center", "top_left", "top_right",
                                             "bottom_left", "bottom_right"]),
              default="center", show_default=True)
@click.option("--chart-weight", default=1.0, show_default=True)
@click.option("--background-weight", default=1.0, show_default=True)
@click.option("--combine", type=click.Choice(["sum", "max"]), default="sum",
              show_default=True)
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def compose(chart_map, background, mode, map_kind, relative_scale, anchor,
            chart_weight, background_weight, combine, out):
    """Place a chart control map into a background and mix the maps."""
    with _cli_errors():
        chart = read_png(chart_map, mode="L")
        bg = read_png(background)
        bh, bw = bg.shape[:2]
        ch, cw = chart.shape[:2]
        transform = plan_placement((cw, ch), (bw, bh),
                                   relative_scale=relative_scale, anchor=anchor)
        placed = place_map(chart, transform, (bw, bh), kind=ControlKind(map_kind))
        if mode == "blend":
            composed = compose_maps(placed, canny(bg), mode=ComposeMode.BLEND,
                                    chart_weight=chart_weight,
                                    background_weight=background_weight,
                                    combine=combine)
        else:
            composed = compose_maps(placed, mode=ComposeMode.ADDITIVE,
                                    chart_weight=chart_weight)
        write_png(out, composed)
        clamp_note = " (placement clamped)" if transform.clamped else ""
        click.echo(
            f"wrote {out} scale={transform.scale:.4f} "
            f"offset={transform.offset}{clamp_note}"
        )


@main.command()
@click.option("--background", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--outline", required=True, type=click.Path(exists=True, dir_okay=False),
              help="composed outline map (background-sized)")
@click.option("--prompt", required=True)
@click.option("--negative-prompt", default="")
@click.option("--seed", default=42, show_default=True)
@click.option("--steps", default=28, show_default=True)
@click.option("--cfg-scale", default=7.0, show_default=True)
@click.option("--denoising-strength", default=0.55, show_default=True)
@click.option("--style-weight", default=0.8, show_default=True)
@click.option("--outline-weight", default=1.0, show_default=True)
@click.option("--backend", default=None, help=f"backend URL (or {ENV_BACKEND})")
@click.option("--mock", is_flag=True, help="use the in-process deterministic backend")
@click.option("--timeout", default=120.0, show_default=True)
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def generate(background, outline, prompt, negative_prompt, seed, steps, cfg_scale,
             denoising_strength, style_weight, outline_weight, backend, mock,
             timeout, out):
    """One generation call against the backend, no placement logic."""
    with _cli_errors():
        bg = read_png(background)
        outline_map = read_png(outline, mode="L")
        if outline_map.shape != bg.shape[:2]:
            raise SitblendError(
                f"outline {outline_map.shape} does not match background {bg.shape[:2]}"
            )
        h, w = bg.shape[:2]
        request = GenerationRequest(
            prompt=prompt, negative_prompt=negative_prompt, seed=seed,
            steps=steps, cfg_scale=cfg_scale,
            denoising_strength=denoising_strength,
            width=w, height=h, init_image=bg,
            controls=(
                ControlUnit(role=ROLE_STYLE, image=bg, weight=style_weight),
                ControlUnit(role=ROLE_OUTLINE, image=outline_map, weight=outline_weight),
            ),
        )
        with _client_for(mock, backend, timeout) as (client, _is_mock):
            client.auto_pad = True
            result = client.generate(request)
        write_png(out, result.image)
        click.echo(f"wrote {out} seed={result.seed} job={result.job_id}")


@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--factor", default=4, show_default=True)
@click.option("--grid", default="8x8", show_default=True, callback=_parse_grid)
@click.option("--overlap", default=16, show_default=True)
@click.option("--out", "-o", required=True, type=click.Path(dir_okay=False))
def upscale(image, factor, grid, overlap, out):
    """Tile-based upscale by an integer factor."""
    with _cli_errors():
        pixels = read_png(image)
        result = upscale_tiled(pixels, factor=factor, grid=grid, overlap=overlap)
        write_png(out, result)
        click.echo(f"wrote {out} ({result.shape[1]}x{result.shape[0]})")


@main.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--tolerance", default=None, type=float,
              help="bar height tolerance px (default: from the run's config)")
@click.option("--threshold", default=None, type=float,
              help="edge alignment threshold (default: from the run's config)")
def verify(run_dir, tolerance, threshold):
    """Re-verify a finished run directory; exit 1 if it fails."""
    with _cli_errors():
        run_dir = Path(run_dir)
        manifest = read_manifest(run_dir / "manifest.json")
        cfg = config_from_dict(manifest.config)
        spec = parse_spec(json.dumps(manifest.chart_spec))
        output = read_png(run_dir / manifest.artifacts["output"])
        composed = read_png(run_dir / manifest.artifacts["outline"], mode="L")

        from .chartspec import layout_chart
        from .compose import PlacementTransform
        placement = manifest.extra.get("placement", {})
        transform = PlacementTransform(
            scale=placement.get("scale", 1.0),
            offset=tuple(placement.get("offset", (0, 0))),
            chart_size=tuple(spec.canvas),
            placed_size=tuple(placement.get("placed_size", spec.canvas)),
            clamped=placement.get("clamped", False),
        )
        report = verify_legibility(
            output, composed, layout=layout_chart(spec), transform=transform,
            tolerance_px=tolerance if tolerance is not None else cfg.verify.tolerance_px,
            radius=cfg.verify.radius,
            alignment_threshold=(threshold if threshold is not None
                                 else cfg.verify.alignment_threshold),
            canny_params={"low": cfg.verify.detect_low,
                          "high": cfg.verify.detect_high},
            map_kind=cfg.outline_kind,
        )
        click.echo(report.to_json(), nl=False)
        sys.exit(0 if report.passed else 1)


@main.command()
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--background", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--prompt", default=None, help="override the config prompt")
@click.option("--seed", default=None, type=int, help="override the config seed")
@click.option("--upscale/--no-upscale", "do_upscale", default=None,
              help="override the config upscale toggle")
@click.option("--backend", default=None, help=f"backend URL (or {ENV_BACKEND})")
@click.option("--mock", is_flag=True)
@click.option("--data-dir", default=None, help=f"artifact root (or {ENV_DATA_DIR})")
@click.option("--run-id", default=None)
@click.option("--timeout", default=120.0, show_default=True)
def run(spec_path, background, config_path, prompt, seed, do_upscale, backend,
        mock, data_dir, run_id, timeout):
    """Execute the full pipeline and write a run directory."""
    with _cli_errors():
        spec = parse_spec(Path(spec_path).read_text(encoding="utf-8"))
        bg = read_png(background)
        cfg = load_config(config_path) if config_path else config_from_dict({})
        overrides: dict = {}
        if prompt is not None:
            overrides.setdefault("generation", {})["prompt"] = prompt
        if seed is not None:
            overrides.setdefault("generation", {})["seed"] = seed
        if do_upscale is not None:
            overrides.setdefault("upscale", {})["enabled"] = do_upscale
        if overrides:
            cfg = merge_overrides(cfg, overrides)

        root = Path(data_dir or os.environ.get(ENV_DATA_DIR, "./data"))
        run_id = run_id or uuid.uuid4().hex[:12]
        run_dir = root / "runs" / run_id

        with _client_for(mock, backend, timeout) as (client, is_mock):
            result = execute_run(spec, bg, cfg, client, run_dir=run_dir,
                                 run_id=run_id, backend_is_mock=is_mock)
        click.echo(f"run {result.run_id} -> {result.run_dir}")
        click.echo(f"stable_hash {stable_hash(result.manifest)}")
        click.echo(
            f"legibility: alignment={result.report.edge_alignment:.3f} "
            f"passed={result.report.passed}"
        )
        sys.exit(0 if result.report.passed else 1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--data-dir", default=None, help=f"artifact root (or {ENV_DATA_DIR})")
@click.option("--backend", default=None, help=f"backend URL (or {ENV_BACKEND})")
@click.option("--mock", is_flag=True)
@click.option("--frontend-dir", default=None,
              type=click.Path(file_okay=False), help="static UI build to serve at /")
def serve(host, port, data_dir, backend, mock, frontend_dir):
    """Start the HTTP service."""
    with _cli_errors():
        import uvicorn

        from .service import create_app

        app = create_app(data_dir=data_dir, backend_url=backend, mock=mock,
                         frontend_dir=frontend_dir)
        uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
