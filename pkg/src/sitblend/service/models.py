"""Request/response bodies for the HTTP API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class CreateSessionRequest(BaseModel):
    chart: dict = Field(description="chart-spec document")
    background_png_base64: str = Field(description="background photo, base64 PNG")
    name: str = ""
    config: dict = Field(default_factory=dict, description="run-config overrides")


class IterationRequest(BaseModel):
    """Per-iteration knobs; anything not set inherits the session config."""

    prompt: Optional[str] = None
    seed: Optional[int] = None
    overrides: dict = Field(default_factory=dict)


class IterationModel(BaseModel):
    index: int
    status: str
    created_at: str
    params: dict
    run_id: Optional[str] = None
    error: Optional[dict] = None
    parent_hash: str
    record_hash: str


class SessionSummary(BaseModel):
    id: str
    name: str
    created_at: str
    iteration_count: int
    busy: bool


class SessionDetail(SessionSummary):
    config: dict
    chart: dict
    iterations: list


class JobModel(BaseModel):
    id: str
    session_id: str
    iteration: int
    state: str  # queued | running | done | error
    error: Optional[dict] = None


class IterationStarted(BaseModel):
    iteration: int
    job: JobModel


class HealthResponse(BaseModel):
    status: str
    version: str
    backend: dict
    sessions: int
