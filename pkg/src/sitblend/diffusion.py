"""HTTP client for the generation backend.

Wire protocol (full field-by-field description in docs/wire-protocol.md):

* ``POST {base}/generate`` with a JSON body -> ``{"job_id": str}``
* ``GET  {base}/jobs/{job_id}`` -> ``{"status": "queued"|"running"|"done"|
  "error", "result": {...}?, "error": {"message": str}?}``
* ``GET  {base}/health`` -> ``{"status": "ok", "model": str}``

Request bodies are serialized canonically: fixed key order, compact
separators, images as base64 PNG. Identical requests are identical bytes,
which keeps request hashing and replay stable.

Output dimensions must be multiples of 8. With ``auto_pad`` the client
pads the init image and every control map (edge-replicate) up to the next
multiple and crops the result back; without it a violation raises.
"""

from __future__ import annotations

import base64
import json
import threading
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import requests

from .errors import (
    BackendConnectError,
    BackendError,
    GenerationTimeout,
    RequestError,
)
from .png import decode_png, encode_png

DEFAULT_STEPS = 28
DEFAULT_CFG_SCALE = 7.0
DEFAULT_OUTLINE_WEIGHT = 1.0
DEFAULT_STYLE_WEIGHT = 0.8

# control unit roles: style carries the raw environment image, outline the
# composed chart map
ROLE_STYLE = "style"
ROLE_OUTLINE = "outline"


@dataclass(frozen=True)
class ControlUnit:
    role: str                 # "style" | "outline"
    image: np.ndarray         # (H,W) or (H,W,3) uint8
    weight: float = 1.0


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    width: int
    height: int
    seed: int = 42
    negative_prompt: str = ""
    steps: int = DEFAULT_STEPS
    cfg_scale: float = DEFAULT_CFG_SCALE
    denoising_strength: float = 0.55
    init_image: Optional[np.ndarray] = None
    controls: Sequence[ControlUnit] = field(default_factory=tuple)


@dataclass(frozen=True)
class GenerationResult:
    image: np.ndarray
    seed: int
    job_id: str
    timing_ms: float = 0.0


def _b64png(image: np.ndarray) -> str:
    return base64.b64encode(encode_png(np.asarray(image))).decode("ascii")


def validate_request(req: GenerationRequest) -> None:
    if not req.prompt:
        raise RequestError("prompt must be non-empty")
    if req.width <= 0 or req.height <= 0:
        raise RequestError(f"dimensions must be positive, got {req.width}x{req.height}")
    if req.width % 8 or req.height % 8:
        raise RequestError(
            f"dimensions must be multiples of 8, got {req.width}x{req.height} "
            "(enable auto_pad to round up)"
        )
    if req.steps < 1:
        raise RequestError(f"steps must be >= 1, got {req.steps}")
    if req.cfg_scale <= 0:
        raise RequestError(f"cfg_scale must be > 0, got {req.cfg_scale}")
    if not 0.0 <= req.denoising_strength <= 1.0:
        raise RequestError(
            f"denoising_strength must be in [0, 1], got {req.denoising_strength}"
        )
    roles = {ROLE_STYLE, ROLE_OUTLINE}
    for unit in req.controls:
        if unit.role not in roles:
            raise RequestError(f"unknown control role {unit.role!r} (one of {sorted(roles)})")
        if unit.weight < 0:
            raise RequestError(f"control weight must be >= 0, got {unit.weight}")
        ih, iw = np.asarray(unit.image).shape[:2]
        if (iw, ih) != (req.width, req.height):
            raise RequestError(
                f"control map for role {unit.role!r} is {iw}x{ih}, "
                f"request is {req.width}x{req.height}"
            )
    if req.init_image is not None:
        ih, iw = np.asarray(req.init_image).shape[:2]
        if (iw, ih) != (req.width, req.height):
            raise RequestError(
                f"init image is {iw}x{ih}, request is {req.width}x{req.height}"
            )


def canonical_payload(req: GenerationRequest) -> bytes:
    """Byte-stable JSON body: fixed key order, compact separators."""
    validate_request(req)
    body = {
        "prompt": req.prompt,
        "negative_prompt": req.negative_prompt,
        "seed": int(req.seed),
        "steps": int(req.steps),
        "cfg_scale": float(req.cfg_scale),
        "denoising_strength": float(req.denoising_strength),
        "width": int(req.width),
        "height": int(req.height),
        "init_image": _b64png(req.init_image) if req.init_image is not None else None,
        "controls": [
            {"role": u.role, "map": _b64png(u.image), "weight": float(u.weight)}
            for u in req.controls
        ],
    }
    return json.dumps(body, separators=(",", ":")).encode("utf-8")


def pad_to_multiple(image: np.ndarray, multiple: int = 8) -> np.ndarray:
    """Edge-replicate pad right/bottom so both dims divide ``multiple``."""
    arr = np.asarray(image)
    h, w = arr.shape[:2]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return arr
    pad = ((0, ph), (0, pw)) + ((0, 0),) * (arr.ndim - 2)
    return np.pad(arr, pad, mode="edge")


def _padded_request(req: GenerationRequest) -> GenerationRequest:
    w8 = req.width + ((-req.width) % 8)
    h8 = req.height + ((-req.height) % 8)
    if (w8, h8) == (req.width, req.height):
        return req
    return GenerationRequest(
        prompt=req.prompt,
        width=w8,
        height=h8,
        seed=req.seed,
        negative_prompt=req.negative_prompt,
        steps=req.steps,
        cfg_scale=req.cfg_scale,
        denoising_strength=req.denoising_strength,
        init_image=None if req.init_image is None else pad_to_multiple(req.init_image),
        controls=tuple(
            ControlUnit(role=u.role, image=pad_to_multiple(u.image), weight=u.weight)
            for u in req.controls
        ),
    )


class DiffusionClient:
    """Submit-and-poll client; one instance is safe to share across threads.

    ``max_in_flight`` (default 1) bounds concurrent generations through this
    client with a semaphore; extra callers block until a slot frees up.
    """

    def __init__(self, base_url: str, timeout: float = 120.0,
                 poll_interval: float = 0.25, connect_retries: int = 3,
                 backoff: float = 1.5, max_in_flight: int = 1,
                 auto_pad: bool = False, session: Optional[requests.Session] = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.poll_interval = poll_interval
        self.connect_retries = max(1, int(connect_retries))
        self.backoff = backoff
        self.auto_pad = auto_pad
        self._session = session or requests.Session()
        self._slots = threading.BoundedSemaphore(max(1, int(max_in_flight)))

    # -- raw HTTP with retry/backoff --------------------------------------

    def _request(self, method: str, path: str, data: Optional[bytes] = None) -> dict:
        url = self.base_url + path
        delay = self.poll_interval
        last_exc = None
        for attempt in range(self.connect_retries):
            try:
                resp = self._session.request(
                    method, url, data=data,
                    headers={"Content-Type": "application/json"} if data else None,
                    timeout=self.timeout,
                )
            except requests.exceptions.RequestException as exc:
                last_exc = exc
                if attempt + 1 < self.connect_retries:
                    time.sleep(delay)
                    delay *= self.backoff
                continue
            if resp.status_code != 200:
                raise BackendError(
                    f"backend returned HTTP {resp.status_code} for {path}",
                    payload=resp.text,
                )
            try:
                return resp.json()
            except ValueError as exc:
                raise BackendError(
                    f"backend sent non-JSON for {path}", payload=resp.text
                ) from exc
        raise BackendConnectError(
            f"cannot reach backend at {url} after {self.connect_retries} attempts: {last_exc}"
        )

    # -- protocol operations ----------------------------------------------

    def health(self) -> dict:
        return self._request("GET", "/health")

    def submit(self, req: GenerationRequest) -> str:
        if self.auto_pad:
            req = _padded_request(req)
        payload = canonical_payload(req)
        reply = self._request("POST", "/generate", data=payload)
        job_id = reply.get("job_id")
        if not job_id:
            raise BackendError("backend reply missing job_id", payload=json.dumps(reply))
        return str(job_id)

    def poll(self, job_id: str, deadline: Optional[float] = None) -> GenerationResult:
        if deadline is None:
            deadline = time.monotonic() + self.timeout
        while True:
            reply = self._request("GET", f"/jobs/{job_id}")
            status = reply.get("status")
            if status == "done":
                return self._parse_result(reply, job_id)
            if status == "error":
                message = (reply.get("error") or {}).get("message", "unknown backend error")
                raise BackendError(f"generation failed: {message}", payload=json.dumps(reply))
            if status not in ("queued", "running"):
                raise BackendError(
                    f"unknown job status {status!r}", payload=json.dumps(reply)
                )
            if time.monotonic() >= deadline:
                raise GenerationTimeout(
                    f"job {job_id} still {status} after {self.timeout:.1f}s",
                    job_id=job_id,
                )
            time.sleep(self.poll_interval)

    def generate(self, req: GenerationRequest) -> GenerationResult:
        """Submit and poll to completion; crops auto-padded results back."""
        want = (req.width, req.height)
        with self._slots:
            deadline = time.monotonic() + self.timeout
            job_id = self.submit(req)
            result = self.poll(job_id, deadline=deadline)
        h, w = result.image.shape[:2]
        if (w, h) != want:
            if w < want[0] or h < want[1]:
                raise BackendError(
                    f"backend returned {w}x{h}, smaller than requested {want[0]}x{want[1]}"
                )
            result = GenerationResult(
                image=result.image[: want[1], : want[0]],
                seed=result.seed,
                job_id=result.job_id,
                timing_ms=result.timing_ms,
            )
        return result

    @staticmethod
    def _parse_result(reply: dict, job_id: str) -> GenerationResult:
        result = reply.get("result") or {}
        b64 = result.get("image")
        if not b64:
            raise BackendError("done job carries no image", payload=json.dumps(reply))
        try:
            image = decode_png(base64.b64decode(b64))
        except Exception as exc:
            raise BackendError(f"cannot decode result image: {exc}") from exc
        return GenerationResult(
            image=image,
            seed=int(result.get("seed", -1)),
            job_id=job_id,
            timing_ms=float(result.get("timing_ms", 0.0)),
        )
