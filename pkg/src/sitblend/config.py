"""Run configuration: defaults, file loading, canonical dict export.

Every knob that changes output pixels lives here and is recorded verbatim
in the run manifest. Configs load from JSON with unknown keys rejected, so
a typo fails loudly instead of silently running with defaults.

The denoising default depends on the compose mode: additive runs keep more
of the environment (0.55), blend runs need a stronger push (0.75).
An explicit value always wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .compose import ComposeMode
from .control import (
    DEFAULT_CANNY_HIGH,
    DEFAULT_CANNY_LOW,
    DEFAULT_CANNY_SIGMA,
    DEFAULT_DOG_SIGMAS,
    ControlKind,
)
from .diffusion import (
    DEFAULT_CFG_SCALE,
    DEFAULT_OUTLINE_WEIGHT,
    DEFAULT_STEPS,
    DEFAULT_STYLE_WEIGHT,
)
from .errors import SpecError
from .legibility import DEFAULT_DETECT_HIGH, DEFAULT_DETECT_LOW
from .upscale import DEFAULT_FACTOR, DEFAULT_GRID, DEFAULT_OVERLAP

DENOISING_ADDITIVE = 0.55
DENOISING_BLEND = 0.75

# backgrounds larger than this on either side are downscaled before use
MAX_SIDE = 1024


@dataclass(frozen=True)
class CannyConfig:
    sigma: float = DEFAULT_CANNY_SIGMA
    low: float = DEFAULT_CANNY_LOW
    high: float = DEFAULT_CANNY_HIGH


@dataclass(frozen=True)
class DogConfig:
    sigma1: float = DEFAULT_DOG_SIGMAS[0]
    sigma2: float = DEFAULT_DOG_SIGMAS[1]


@dataclass(frozen=True)
class ComposeConfig:
    mode: ComposeMode = ComposeMode.ADDITIVE
    chart_weight: float = 1.0
    background_weight: float = 1.0
    combine: str = "sum"  # "sum" | "max"


@dataclass(frozen=True)
class PlacementConfig:
    relative_scale: float = 0.6
    anchor: str = "center"
    offset_px: Optional[tuple] = None


@dataclass(frozen=True)
class GenerationConfig:
    prompt: str = "a detailed photograph of a building facade"
    negative_prompt: str = ""
    seed: int = 42
    steps: int = DEFAULT_STEPS
    cfg_scale: float = DEFAULT_CFG_SCALE
    denoising_strength: Optional[float] = None  # None -> per compose mode
    outline_weight: float = DEFAULT_OUTLINE_WEIGHT
    style_weight: float = DEFAULT_STYLE_WEIGHT


@dataclass(frozen=True)
class UpscaleConfig:
    enabled: bool = False
    factor: int = DEFAULT_FACTOR
    grid: tuple = DEFAULT_GRID
    overlap: int = DEFAULT_OVERLAP


@dataclass(frozen=True)
class VerifyConfig:
    tolerance_px: float = 2.0
    radius: int = 2
    alignment_threshold: float = 0.9
    # alignment detector; hotter than extraction on purpose (recall only)
    detect_low: float = DEFAULT_DETECT_LOW
    detect_high: float = DEFAULT_DETECT_HIGH


@dataclass(frozen=True)
class RunConfig:
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    outline_kind: ControlKind = ControlKind.CANNY
    canny: CannyConfig = field(default_factory=CannyConfig)
    dog: DogConfig = field(default_factory=DogConfig)
    compose: ComposeConfig = field(default_factory=ComposeConfig)
    placement: PlacementConfig = field(default_factory=PlacementConfig)
    upscale: UpscaleConfig = field(default_factory=UpscaleConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)
    max_side: int = MAX_SIDE

    @property
    def denoising_strength(self) -> float:
        explicit = self.generation.denoising_strength
        if explicit is not None:
            return explicit
        return (
            DENOISING_ADDITIVE
            if self.compose.mode == ComposeMode.ADDITIVE
            else DENOISING_BLEND
        )


_SECTION_FIELDS = {
    "generation": (
        "prompt", "negative_prompt", "seed", "steps", "cfg_scale",
        "denoising_strength", "outline_weight", "style_weight",
    ),
    "canny": ("sigma", "low", "high"),
    "dog": ("sigma1", "sigma2"),
    "compose": ("mode", "chart_weight", "background_weight", "combine"),
    "placement": ("relative_scale", "anchor", "offset_px"),
    "upscale": ("enabled", "factor", "grid", "overlap"),
    "verify": ("tolerance_px", "radius", "alignment_threshold"),
}


def config_from_dict(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise SpecError("config document must be an object")
    known_top = set(_SECTION_FIELDS) | {"outline_kind", "max_side"}
    unknown = set(doc) - known_top
    if unknown:
        raise SpecError(f"unknown config keys: {sorted(unknown)}")

    sections = {}
    for name, fields in _SECTION_FIELDS.items():
        sub = doc.get(name, {})
        if not isinstance(sub, dict):
            raise SpecError(f"config section {name!r} must be an object")
        extra = set(sub) - set(fields)
        if extra:
            raise SpecError(f"unknown keys in config section {name!r}: {sorted(extra)}")
        sections[name] = dict(sub)

    try:
        outline_kind = ControlKind(doc.get("outline_kind", "canny"))
    except ValueError:
        raise SpecError(f"unknown outline_kind {doc.get('outline_kind')!r}") from None
    if outline_kind == ControlKind.DEPTH:
        raise SpecError("outline_kind 'depth' conditions geometry, not outlines; "
                        "use canny, scribble, softedge or hed")
    if outline_kind == ControlKind.HED:
        # hed runs the same DoG detector as softedge here; record the kind
        # that actually executes so manifests stay truthful
        outline_kind = ControlKind.SOFTEDGE

    compose_raw = sections["compose"]
    if "mode" in compose_raw:
        try:
            compose_raw["mode"] = ComposeMode(compose_raw["mode"])
        except ValueError:
            raise SpecError(f"unknown compose mode {compose_raw['mode']!r}") from None

    placement_raw = sections["placement"]
    if placement_raw.get("offset_px") is not None:
        off = placement_raw["offset_px"]
        if not isinstance(off, (list, tuple)) or len(off) != 2:
            raise SpecError("placement.offset_px must be [dx, dy]")
        placement_raw["offset_px"] = (float(off[0]), float(off[1]))

    upscale_raw = sections["upscale"]
    if "grid" in upscale_raw:
        grid = upscale_raw["grid"]
        if not isinstance(grid, (list, tuple)) or len(grid) != 2:
            raise SpecError("upscale.grid must be [rows, cols]")
        upscale_raw["grid"] = (int(grid[0]), int(grid[1]))

    cfg = RunConfig(
        generation=GenerationConfig(**sections["generation"]),
        outline_kind=outline_kind,
        canny=CannyConfig(**sections["canny"]),
        dog=DogConfig(**sections["dog"]),
        compose=ComposeConfig(**compose_raw),
        placement=PlacementConfig(**placement_raw),
        upscale=UpscaleConfig(**upscale_raw),
        verify=VerifyConfig(**sections["verify"]),
        max_side=int(doc.get("max_side", MAX_SIDE)),
    )
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    g = cfg.generation
    if not g.prompt:
        raise SpecError("generation.prompt must be non-empty")
    if g.steps < 1:
        raise SpecError(f"generation.steps must be >= 1, got {g.steps}")
    if g.denoising_strength is not None and not 0.0 <= g.denoising_strength <= 1.0:
        raise SpecError("generation.denoising_strength must be in [0, 1]")
    if g.outline_weight < 0 or g.style_weight < 0:
        raise SpecError("control weights must be >= 0")
    if cfg.placement.relative_scale <= 0:
        raise SpecError("placement.relative_scale must be > 0")
    if cfg.upscale.factor < 1:
        raise SpecError("upscale.factor must be >= 1")
    if cfg.max_side < 64:
        raise SpecError(f"max_side must be >= 64, got {cfg.max_side}")


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(
                f"config syntax error at line {exc.lineno}: {exc.msg}",
                position=(exc.lineno, exc.colno),
            ) from exc
    return config_from_dict(doc)


def config_to_dict(cfg: RunConfig) -> dict:
    """Canonical nested dict with every effective value made explicit."""
    return {
        "generation": {
            "prompt": cfg.generation.prompt,
            "negative_prompt": cfg.generation.negative_prompt,
            "seed": cfg.generation.seed,
            "steps": cfg.generation.steps,
            "cfg_scale": cfg.generation.cfg_scale,
            "denoising_strength": cfg.denoising_strength,
            "outline_weight": cfg.generation.outline_weight,
            "style_weight": cfg.generation.style_weight,
        },
        "outline_kind": cfg.outline_kind.value,
        "canny": {"sigma": cfg.canny.sigma, "low": cfg.canny.low, "high": cfg.canny.high},
        "dog": {"sigma1": cfg.dog.sigma1, "sigma2": cfg.dog.sigma2},
        "compose": {
            "mode": cfg.compose.mode.value,
            "chart_weight": cfg.compose.chart_weight,
            "background_weight": cfg.compose.background_weight,
            "combine": cfg.compose.combine,
        },
        "placement": {
            "relative_scale": cfg.placement.relative_scale,
            "anchor": cfg.placement.anchor,
            "offset_px": list(cfg.placement.offset_px) if cfg.placement.offset_px else None,
        },
        "upscale": {
            "enabled": cfg.upscale.enabled,
            "factor": cfg.upscale.factor,
            "grid": list(cfg.upscale.grid),
            "overlap": cfg.upscale.overlap,
        },
        "verify": {
            "tolerance_px": cfg.verify.tolerance_px,
            "radius": cfg.verify.radius,
            "alignment_threshold": cfg.verify.alignment_threshold,
        },
        "max_side": cfg.max_side,
    }


def merge_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    """New config with ``overrides`` (same nested shape) applied on top."""
    base = config_to_dict(cfg)
    if not isinstance(overrides, dict):
        raise SpecError("config overrides must be an object")
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            base[key].update(value)
        else:
            base[key] = value
    return config_from_dict(base)
