"""FastAPI application: the pipeline behind a session-oriented HTTP API.

Iterations run on a background thread; the POST returns immediately with a
job handle to poll. Error responses all share one shape,
``{"stage": ..., "message": ...}``, matching the pipeline's own stage
vocabulary so a client can say where a run died without parsing prose.
"""

from __future__ import annotations

import base64
import binascii
import json
import os
import threading
import uuid
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..chartspec import parse_spec
from ..config import config_from_dict, merge_overrides
from ..diffusion import DiffusionClient
from ..errors import SessionBusy, SessionNotFound, SitblendError, SpecError, StageError
from ..mockbackend import MockBackendServer
from ..png import decode_png
from ..runner import execute_run
from ..session import SessionStore
from .models import (
    CreateSessionRequest,
    HealthResponse,
    IterationRequest,
    IterationStarted,
    IterationModel,
    JobModel,
    SessionDetail,
    SessionSummary,
)

ARTIFACT_NAMES = ("chart", "outline", "background", "output", "upscaled")

DEFAULT_DATA_DIR = "./data"


def _default_frontend_dir() -> Optional[Path]:
    override = os.environ.get("SITBLEND_FRONTEND_DIR")
    if override:
        return Path(override)
    # src layout: .../src/sitblend/service/app.py -> repo root three up
    candidate = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    return candidate if candidate.exists() else None


class _Jobs:
    def __init__(self):
        self._lock = threading.Lock()
        self._jobs: dict = {}

    def create(self, session_id: str, iteration: int) -> JobModel:
        job = JobModel(
            id=uuid.uuid4().hex[:12], session_id=session_id,
            iteration=iteration, state="queued",
        )
        with self._lock:
            self._jobs[job.id] = job
        return job

    def update(self, job_id: str, state: str, error: Optional[dict] = None) -> None:
        with self._lock:
            old = self._jobs[job_id]
            self._jobs[job_id] = old.model_copy(update={"state": state, "error": error})

    def get(self, job_id: str) -> Optional[JobModel]:
        with self._lock:
            return self._jobs.get(job_id)


def create_app(data_dir=None, backend_url: Optional[str] = None,
               mock: bool = False, client: Optional[DiffusionClient] = None,
               frontend_dir=None) -> FastAPI:
    """Build the service.

    Backend resolution order: explicit ``client``, ``mock=True`` (an owned
    in-process mock server), ``backend_url``, then SITBLEND_BACKEND_URL.
    """
    data_dir = Path(data_dir or os.environ.get("SITBLEND_DATA_DIR", DEFAULT_DATA_DIR))
    store = SessionStore(data_dir)
    jobs = _Jobs()

    owned_mock: Optional[MockBackendServer] = None
    is_mock = False
    if client is None:
        if mock:
            owned_mock = MockBackendServer().start()
            client = DiffusionClient(owned_mock.url)
            is_mock = True
        else:
            url = backend_url or os.environ.get("SITBLEND_BACKEND_URL")
            if not url:
                raise SitblendError(
                    "no backend configured: pass backend_url, mock=True, "
                    "or set SITBLEND_BACKEND_URL"
                )
            client = DiffusionClient(url)

    @asynccontextmanager
    async def _lifespan(_app):
        yield
        if owned_mock is not None:
            owned_mock.stop()

    app = FastAPI(title="sitblend", version=__version__, lifespan=_lifespan)
    app.state.store = store
    app.state.client = client
    app.state.mock_server = owned_mock

    # -- error shape -------------------------------------------------------

    def error_response(status: int, stage: str, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"stage": stage, "message": message})

    @app.exception_handler(SessionBusy)
    async def _busy(_req, exc):
        return error_response(409, "session", str(exc))

    @app.exception_handler(SessionNotFound)
    async def _not_found(_req, exc):
        return error_response(404, "lookup", str(exc))

    @app.exception_handler(StageError)
    async def _stage_err(_req, exc):
        return error_response(500, exc.stage, exc.message)

    @app.exception_handler(SpecError)
    async def _spec_err(_req, exc):
        return error_response(400, "spec", str(exc))

    @app.exception_handler(SitblendError)
    async def _generic_err(_req, exc):
        return error_response(400, "request", str(exc))

    # -- helpers -----------------------------------------------------------

    def summary(info) -> SessionSummary:
        return SessionSummary(
            id=info.id, name=info.name, created_at=info.created_at,
            iteration_count=len(info.iterations), busy=store.is_busy(info.id),
        )

    def run_iteration(session_id: str, index: int, job_id: str, req: IterationRequest):
        jobs.update(job_id, "running")
        params = {
            "prompt": req.prompt, "seed": req.seed, "overrides": req.overrides,
        }
        try:
            info = store.get_session(session_id)
            cfg = config_from_dict({})
            if info.config:
                cfg = merge_overrides(cfg, info.config)
            if req.overrides:
                cfg = merge_overrides(cfg, req.overrides)
            gen_overrides = {}
            if req.prompt is not None:
                gen_overrides["prompt"] = req.prompt
            if req.seed is not None:
                gen_overrides["seed"] = req.seed
            if gen_overrides:
                cfg = merge_overrides(cfg, {"generation": gen_overrides})

            spec = parse_spec(store.chart_document(session_id))
            background = decode_png(store.background_bytes(session_id))
            result = execute_run(
                spec, background, cfg, client,
                run_dir=store.iteration_dir(session_id, index),
                backend_is_mock=is_mock,
            )
            store.record_iteration(
                session_id, index, "completed", params, run_id=result.run_id,
            )
            jobs.update(job_id, "done")
        except StageError as exc:
            store.record_iteration(
                session_id, index, "failed", params,
                error={"stage": exc.stage, "message": exc.message},
            )
            jobs.update(job_id, "error", {"stage": exc.stage, "message": exc.message})
        except Exception as exc:  # noqa: BLE001 - job must reach a terminal state
            detail = {"stage": "internal", "message": f"{type(exc).__name__}: {exc}"}
            store.record_iteration(session_id, index, "failed", params, error=detail)
            jobs.update(job_id, "error", detail)

    # -- endpoints ---------------------------------------------------------

    @app.get("/api/health", response_model=HealthResponse)
    def health():
        try:
            backend = dict(client.health())
            backend["reachable"] = True
        except SitblendError as exc:
            backend = {"reachable": False, "message": str(exc)}
        backend["url"] = client.base_url
        backend["mock"] = is_mock
        return HealthResponse(
            status="ok", version=__version__, backend=backend,
            sessions=len(store.list_sessions()),
        )

    @app.post("/api/sessions", response_model=SessionSummary, status_code=201)
    def create_session(body: CreateSessionRequest):
        chart_doc = json.dumps(body.chart, indent=2) + "\n"
        parse_spec(chart_doc)  # reject malformed documents up front
        if body.config:
            merge_overrides(config_from_dict({}), body.config)  # validate only
        try:
            png_bytes = base64.b64decode(body.background_png_base64, validate=True)
        except (binascii.Error, ValueError):
            return error_response(400, "request", "background_png_base64 is not valid base64")
        decode_png(png_bytes)  # reject non-PNG payloads up front
        info = store.create_session(
            chart_doc, png_bytes, name=body.name, config=body.config,
        )
        return summary(info)

    @app.get("/api/sessions")
    def list_sessions():
        return [summary(info).model_dump() for info in store.list_sessions()]

    @app.get("/api/sessions/{session_id}", response_model=SessionDetail)
    def get_session(session_id: str):
        info = store.get_session(session_id)
        chart = json.loads(store.chart_document(session_id))
        return SessionDetail(
            **summary(info).model_dump(),
            config=info.config,
            chart=chart,
            iterations=[
                IterationModel(
                    index=r.index, status=r.status, created_at=r.created_at,
                    params=r.params, run_id=r.run_id, error=r.error,
                    parent_hash=r.parent_hash, record_hash=r.record_hash,
                ).model_dump()
                for r in info.iterations
            ],
        )

    @app.post("/api/sessions/{session_id}/iterations",
              response_model=IterationStarted, status_code=202)
    def start_iteration(session_id: str, body: IterationRequest):
        index = store.begin_iteration(session_id)  # raises SessionBusy -> 409
        job = jobs.create(session_id, index)
        try:
            thread = threading.Thread(
                target=run_iteration, args=(session_id, index, job.id, body),
                daemon=True,
            )
            thread.start()
        except Exception:
            store.abort_iteration(session_id)
            raise
        return IterationStarted(iteration=index, job=job)

    @app.get("/api/jobs/{job_id}", response_model=JobModel)
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            return error_response(404, "lookup", f"no job {job_id!r}")
        return job

    @app.get("/api/sessions/{session_id}/iterations/{index}/artifact/{name}")
    def get_artifact(session_id: str, index: int, name: str):
        if name not in ARTIFACT_NAMES:
            return error_response(
                404, "lookup", f"unknown artifact {name!r} (one of {list(ARTIFACT_NAMES)})"
            )
        store.get_session(session_id)  # 400s on unknown session via handler
        path = store.iteration_dir(session_id, index) / f"{name}.png"
        if not path.exists():
            return error_response(
                404, "lookup", f"artifact {name!r} not present for iteration {index}"
            )
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.get("/api/sessions/{session_id}/iterations/{index}/report")
    def get_report(session_id: str, index: int):
        store.get_session(session_id)
        path = store.iteration_dir(session_id, index) / "legibility.json"
        if not path.exists():
            return error_response(404, "lookup", f"no report for iteration {index}")
        return JSONResponse(content=json.loads(path.read_text(encoding="utf-8")))

    @app.get("/api/sessions/{session_id}/iterations/{index}/manifest")
    def get_manifest(session_id: str, index: int):
        store.get_session(session_id)
        path = store.iteration_dir(session_id, index) / "manifest.json"
        if not path.exists():
            return error_response(404, "lookup", f"no manifest for iteration {index}")
        return JSONResponse(content=json.loads(path.read_text(encoding="utf-8")))

    static_dir = Path(frontend_dir) if frontend_dir else _default_frontend_dir()
    if static_dir is not None and static_dir.exists():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
