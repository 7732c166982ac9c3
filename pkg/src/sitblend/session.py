"""Iterative-refinement sessions: a chart/background pairing plus an
append-only iteration history.

On disk a session is a directory under ``<root>/sessions/<id>/`` holding
session.json, the chart document, the background, and one subdirectory per
iteration (each a full run directory). Iteration records form a hash
chain: every record stores the hash of its predecessor's record, so
truncation or tampering of the history is detectable on load.

Only one mutating job may run per session at a time; the in-flight marker
is in-memory only, so a crashed process never leaves a session wedged.
"""

from __future__ import annotations

import json
import re
import threading
import uuid
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .errors import SessionBusy, SessionNotFound, SitblendError
from .manifest import hash_bytes, now_utc

_ID_RE = re.compile(r"^[a-f0-9]{12}$")

GENESIS = "0" * 64


@dataclass(frozen=True)
class IterationRecord:
    index: int
    status: str                      # "completed" | "failed"
    created_at: str
    params: dict                     # prompt/seed/overrides for this iteration
    run_id: Optional[str] = None
    error: Optional[dict] = None     # {"stage": ..., "message": ...}
    parent_hash: str = GENESIS
    record_hash: str = ""

    def payload(self) -> dict:
        return {
            "index": self.index,
            "status": self.status,
            "created_at": self.created_at,
            "params": self.params,
            "run_id": self.run_id,
            "error": self.error,
            "parent_hash": self.parent_hash,
        }


def _chain_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hash_bytes(canonical.encode("utf-8"))


@dataclass(frozen=True)
class SessionInfo:
    id: str
    name: str
    created_at: str
    config: dict                     # overrides stored at creation
    iterations: tuple = ()

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "created_at": self.created_at,
            "config": self.config,
            "iterations": [
                dict(rec.payload(), record_hash=rec.record_hash)
                for rec in self.iterations
            ],
        }


class SessionStore:
    """Directory-backed store; safe for concurrent use within one process."""

    def __init__(self, root):
        self.root = Path(root)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._in_flight: set = set()

    # -- paths -------------------------------------------------------------

    def session_dir(self, session_id: str) -> Path:
        if not _ID_RE.match(session_id):
            raise SessionNotFound(f"malformed session id {session_id!r}")
        return self.root / "sessions" / session_id

    def iteration_dir(self, session_id: str, index: int) -> Path:
        return self.session_dir(session_id) / f"iter_{index:03d}"

    # -- creation and lookup ----------------------------------------------

    def create_session(self, chart_doc: str, background_png: bytes,
                       name: str = "", config: Optional[dict] = None) -> SessionInfo:
        session_id = uuid.uuid4().hex[:12]
        sdir = self.session_dir(session_id)
        sdir.mkdir(parents=True)
        (sdir / "chart.json").write_text(chart_doc, encoding="utf-8")
        (sdir / "background.png").write_bytes(background_png)
        info = SessionInfo(
            id=session_id,
            name=name or session_id,
            created_at=now_utc(),
            config=config or {},
        )
        self._write(info)
        return info

    def list_sessions(self):
        out = []
        base = self.root / "sessions"
        for entry in sorted(base.iterdir()) if base.exists() else []:
            if entry.is_dir() and _ID_RE.match(entry.name):
                try:
                    out.append(self.get_session(entry.name))
                except SitblendError:
                    continue  # skip unreadable/corrupt entries, keep listing
        out.sort(key=lambda s: s.created_at)
        return out

    def get_session(self, session_id: str) -> SessionInfo:
        path = self.session_dir(session_id) / "session.json"
        if not path.exists():
            raise SessionNotFound(f"no session {session_id!r}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        records = []
        for raw in doc.get("iterations", []):
            records.append(IterationRecord(
                index=raw["index"],
                status=raw["status"],
                created_at=raw["created_at"],
                params=raw["params"],
                run_id=raw.get("run_id"),
                error=raw.get("error"),
                parent_hash=raw["parent_hash"],
                record_hash=raw["record_hash"],
            ))
        info = SessionInfo(
            id=doc["id"], name=doc["name"], created_at=doc["created_at"],
            config=doc.get("config", {}), iterations=tuple(records),
        )
        self._verify_chain(info)
        return info

    def chart_document(self, session_id: str) -> str:
        return (self.session_dir(session_id) / "chart.json").read_text(encoding="utf-8")

    def background_bytes(self, session_id: str) -> bytes:
        return (self.session_dir(session_id) / "background.png").read_bytes()

    # -- iteration lifecycle ----------------------------------------------

    def begin_iteration(self, session_id: str) -> int:
        """Reserve the next iteration index; raises SessionBusy if one is
        already in flight for this session."""
        info = self.get_session(session_id)  # existence check first
        with self._lock:
            if session_id in self._in_flight:
                raise SessionBusy(f"session {session_id} already has a job in flight")
            self._in_flight.add(session_id)
        return len(info.iterations)

    def abort_iteration(self, session_id: str) -> None:
        with self._lock:
            self._in_flight.discard(session_id)

    def record_iteration(self, session_id: str, index: int, status: str,
                         params: dict, run_id: Optional[str] = None,
                         error: Optional[dict] = None) -> IterationRecord:
        """Append the outcome reserved by begin_iteration and release the
        in-flight marker. Indices must stay contiguous."""
        try:
            info = self.get_session(session_id)
            if index != len(info.iterations):
                raise SitblendError(
                    f"iteration index {index} out of order; next is {len(info.iterations)}"
                )
            if status not in ("completed", "failed"):
                raise SitblendError(f"unknown iteration status {status!r}")
            parent = info.iterations[-1].record_hash if info.iterations else GENESIS
            record = IterationRecord(
                index=index, status=status, created_at=now_utc(),
                params=params, run_id=run_id, error=error, parent_hash=parent,
            )
            record = replace(record, record_hash=_chain_hash(record.payload()))
            info = SessionInfo(
                id=info.id, name=info.name, created_at=info.created_at,
                config=info.config, iterations=info.iterations + (record,),
            )
            self._write(info)
            return record
        finally:
            with self._lock:
                self._in_flight.discard(session_id)

    def is_busy(self, session_id: str) -> bool:
        with self._lock:
            return session_id in self._in_flight

    # -- internals ---------------------------------------------------------

    def _write(self, info: SessionInfo) -> None:
        path = self.session_dir(info.id) / "session.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(info.to_dict(), indent=2) + "\n", encoding="utf-8")
        tmp.replace(path)

    @staticmethod
    def _verify_chain(info: SessionInfo) -> None:
        prev = GENESIS
        for i, rec in enumerate(info.iterations):
            if rec.index != i:
                raise SitblendError(
                    f"session {info.id}: iteration indices not contiguous at {i}"
                )
            if rec.parent_hash != prev:
                raise SitblendError(
                    f"session {info.id}: hash chain broken at iteration {i}"
                )
            if _chain_hash(rec.payload()) != rec.record_hash:
                raise SitblendError(
                    f"session {info.id}: iteration {i} record hash mismatch"
                )
            prev = rec.record_hash
