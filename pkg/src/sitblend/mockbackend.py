"""Deterministic in-process stand-in for the generation backend.

Serves the documented wire protocol over real HTTP (stdlib server, daemon
thread) so client tests exercise actual sockets. The "model" is a fixed
arithmetic rule chosen so downstream checks have teeth:

* denoising_strength 0 returns the init image byte-for-byte;
* otherwise each pixel moves toward a high-contrast tint with weight
  ``alpha = (outline / 255) * (0.75 + 0.25 * ds)``, so the composed outline
  is imprinted strongly enough that an edge detector finds it again;
* the tint picks, per channel, the far side of the init image's mean
  (jittered by a seeded RNG), so different seeds give visibly different
  outputs while identical requests stay bit-identical.

Instances record every request body for assertions, can delay completion
by a number of polls, and can be told to fail the next submission.
"""

from __future__ import annotations

import base64
import json
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .png import decode_png, encode_png

MODEL_NAME = "mock-diffusion-1"


def mock_generate(init_image: np.ndarray, outline: np.ndarray,
                  denoising_strength: float, seed: int) -> np.ndarray:
    """The mock's entire image model; pure function of its arguments."""
    init = np.asarray(init_image, dtype=np.float64)
    if init.ndim == 2:
        init = np.stack([init] * 3, axis=-1)
    if denoising_strength <= 0:
        return init.astype(np.uint8)

    rng = np.random.default_rng(seed if seed >= 0 else 0)
    jitter = rng.integers(0, 32, size=3)
    tint = np.empty(3, dtype=np.float64)
    for c in range(3):
        mean = init[:, :, c].mean()
        tint[c] = 255.0 - jitter[c] if mean <= 127.0 else 0.0 + jitter[c]

    alpha = (np.asarray(outline, dtype=np.float64) / 255.0) * (
        0.75 + 0.25 * denoising_strength
    )
    alpha = alpha[:, :, None]
    out = (1.0 - alpha) * init + alpha * tint[None, None, :]
    return np.round(np.clip(out, 0, 255)).astype(np.uint8)


class _Job:
    def __init__(self, payload: dict, polls_left: int):
        self.payload = payload
        self.polls_left = polls_left
        self.result: dict | None = None
        self.error: str | None = None


class MockBackendServer:
    """Context-managed HTTP server; ``url`` is the base for DiffusionClient."""

    def __init__(self, latency_polls: int = 0):
        self.latency_polls = latency_polls
        self.requests: list = []  # decoded bodies of every /generate call
        self._jobs: dict = {}
        self._lock = threading.Lock()
        self._fail_next: dict | None = None
        self._httpd: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> "MockBackendServer":
        backend = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # silence per-request stderr lines
                pass

            def _send(self, code: int, obj: dict):
                body = json.dumps(obj).encode("utf-8")
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                if self.path == "/health":
                    self._send(200, {"status": "ok", "model": MODEL_NAME})
                elif self.path.startswith("/jobs/"):
                    backend._handle_poll(self, self.path[len("/jobs/"):])
                else:
                    self._send(404, {"error": {"message": f"no route {self.path}"}})

            def do_POST(self):
                if self.path != "/generate":
                    self._send(404, {"error": {"message": f"no route {self.path}"}})
                    return
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                backend._handle_generate(self, raw)

        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
            self._httpd = None

    def __enter__(self) -> "MockBackendServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def url(self) -> str:
        assert self._httpd is not None, "server not started"
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def fail_next(self, status: int = 500, message: str = "injected failure") -> None:
        """Make the next /generate call fail with an HTTP error."""
        self._fail_next = {"status": status, "message": message}

    # -- request handling --------------------------------------------------

    def _handle_generate(self, handler, raw: bytes) -> None:
        with self._lock:
            injected = self._fail_next
            self._fail_next = None
        if injected is not None:
            handler._send(injected["status"], {"error": {"message": injected["message"]}})
            return
        try:
            payload = json.loads(raw.decode("utf-8"))
        except ValueError:
            handler._send(400, {"error": {"message": "body is not JSON"}})
            return
        problem = self._validate(payload)
        if problem:
            handler._send(400, {"error": {"message": problem}})
            return

        job_id = uuid.uuid4().hex
        job = _Job(payload, self.latency_polls)
        with self._lock:
            self.requests.append(payload)
            self._jobs[job_id] = job
        handler._send(200, {"job_id": job_id})

    @staticmethod
    def _validate(payload: dict) -> str | None:
        for key in ("prompt", "seed", "width", "height", "denoising_strength", "controls"):
            if key not in payload:
                return f"missing field {key!r}"
        if payload["width"] % 8 or payload["height"] % 8:
            return f"dimensions must be multiples of 8, got {payload['width']}x{payload['height']}"
        if not payload["prompt"]:
            return "prompt must be non-empty"
        return None

    def _handle_poll(self, handler, job_id: str) -> None:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            handler._send(404, {"error": {"message": f"unknown job {job_id!r}"}})
            return
        with self._lock:
            if job.polls_left > 0:
                job.polls_left -= 1
                handler._send(200, {"status": "running"})
                return
            if job.result is None and job.error is None:
                try:
                    job.result = self._compute(job.payload)
                except Exception as exc:
                    job.error = str(exc)
        if job.error is not None:
            handler._send(200, {"status": "error", "error": {"message": job.error}})
        else:
            handler._send(200, {"status": "done", "result": job.result})

    def _compute(self, payload: dict) -> dict:
        w, h = payload["width"], payload["height"]
        if payload.get("init_image"):
            init = decode_png(base64.b64decode(payload["init_image"]))
        else:
            init = np.full((h, w, 3), 160, dtype=np.uint8)

        outline = np.zeros((h, w), dtype=np.float64)
        for unit in payload.get("controls", []):
            if unit.get("role") == "outline" and unit.get("map"):
                decoded = decode_png(base64.b64decode(unit["map"]), mode="L")
                outline = np.maximum(outline, decoded.astype(np.float64))

        seed = int(payload["seed"])
        out = mock_generate(init, outline, float(payload["denoising_strength"]), seed)
        return {
            "image": base64.b64encode(encode_png(out)).decode("ascii"),
            "seed": seed,
            "timing_ms": 1.0,
        }
